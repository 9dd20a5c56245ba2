#include <doctest.h>

#include <cmath>
#include <random>

#include "hbyield/errors.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/numeric.hpp"
#include "hbyield/overlay.hpp"

using namespace hby;

namespace {

// Textbook circle-circle intersection area, written differently from the
// shipped piecewise form (sectors minus kite via Heron-style radical).
double lens_reference(double d, double r1, double r2) {
    if (d <= r2 - r1) return kPi * r1 * r1;
    if (d >= r1 + r2) return 0.0;
    double a1 = r1 * r1 * std::acos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1));
    double a2 = r2 * r2 * std::acos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2));
    double rad = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    return a1 + a2 - 0.5 * std::sqrt(rad);
}

OverlayParams baseline() {
    return OverlayParams{}; // defaults carry the baseline design values
}

} // namespace

TEST_CASE("systematic shift field") {
    OverlayParams p;
    p.tx_um = 0.02;
    p.ty_um = 0.0;
    p.alpha_urad = 0.0;
    p.magnification_ppm = 0.0;
    CHECK(systematic_shift(p, 12345.0, -9876.0).s_um == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(systematic_shift(p, 0.0, 0.0).s_um == doctest::Approx(0.02).epsilon(1e-12));

    SUBCASE("pure rotation is radial") {
        OverlayParams q;
        q.tx_um = q.ty_um = 0.0;
        q.alpha_urad = 2.5;
        q.magnification_ppm = 0.0;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1e5, 1e5);
        for (int i = 0; i < 50; ++i) {
            double x = u(rng), y = u(rng);
            double expect = 2.5e-6 * std::hypot(x, y);
            CHECK(systematic_shift(q, x, y).s_um == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    SUBCASE("magnification from warpage") {
        CHECK(magnification_from_warpage(0.09, 10.0) == doctest::Approx(0.9).epsilon(1e-12));
        OverlayParams q;
        q.tx_um = q.ty_um = 0.0;
        q.alpha_urad = 0.0;
        q.magnification_ppm = magnification_from_warpage(0.09, 10.0);
        // 0.9 ppm at x = 100 mm is 90 nm
        CHECK(systematic_shift(q, 1e5, 0.0).s_um == doctest::Approx(0.09).epsilon(1e-12));
    }
}

TEST_CASE("contact area piecewise lens") {
    const double r1 = 0.15, r2 = 0.25;
    CHECK(contact_area(0.0, r1, r2) == doctest::Approx(0.070685834706).epsilon(1e-9));
    CHECK(contact_area(0.5, r1, r2) == 0.0);

    SUBCASE("matches an independent lens formulation") {
        for (double s : {0.1001, 0.11, 0.15, 0.2, 0.23433138, 0.3, 0.35, 0.3999})
            CHECK(contact_area(s, r1, r2) == doctest::Approx(lens_reference(s, r1, r2)).epsilon(1e-11));
    }

    SUBCASE("continuity at both seams") {
        for (double seam : {r2 - r1, r1 + r2}) {
            double below = contact_area(seam - 1e-12, r1, r2);
            double above = contact_area(seam + 1e-12, r1, r2);
            CHECK(std::abs(below - above) < 1e-9);
        }
    }

    SUBCASE("non-increasing and non-negative") {
        double prev = contact_area(0.0, r1, r2);
        for (int i = 1; i <= 500; ++i) {
            double s = 0.45 * i / 500.0;
            double a = contact_area(s, r1, r2);
            CHECK(a <= prev + 1e-12);
            CHECK(a >= 0.0);
            prev = a;
        }
    }

    SUBCASE("equal radii degenerate at zero shift") {
        CHECK(contact_area(0.0, 0.2, 0.2) == doctest::Approx(kPi * 0.04).epsilon(1e-12));
    }
}

TEST_CASE("max allowed misalignment") {
    SUBCASE("baseline: contact-area root binds") {
        double delta = max_allowed_misalignment(baseline());
        CHECK(delta == doctest::Approx(0.2343313841).epsilon(1e-6));
        // the root actually solves the area equation
        double target = 0.5 * kPi * 0.15 * 0.15;
        CHECK(std::abs(contact_area(delta, 0.15, 0.25) - target) < 1e-9);
        // and the critical-distance term evaluates to 0.35
        OverlayParams p = baseline();
        p.k_ca = 0.0;
        CHECK(max_allowed_misalignment(p) == doctest::Approx(0.35).epsilon(1e-12));
    }

    SUBCASE("k_ca = 0 leaves any touch surviving") {
        OverlayParams p = baseline();
        p.k_ca = 0.0;
        p.k_cd = 0.0;
        p.pitch_um = 10.0; // push the distance bound out of the way
        CHECK(max_allowed_misalignment(p) == doctest::Approx(0.4).epsilon(1e-6));
    }

    SUBCASE("k_cd = 1 gives the half-gap of the pad diameters") {
        OverlayParams p = baseline();
        p.k_cd = 1.0;
        CHECK(max_allowed_misalignment(p) == doctest::Approx((0.5 - 0.3) / 2.0).epsilon(1e-12));
    }

    SUBCASE("rejects inverted pads and out-of-range constraints") {
        OverlayParams p = baseline();
        p.d1_um = 0.6;
        CHECK_THROWS_AS(max_allowed_misalignment(p), ConfigError);
        OverlayParams q = baseline();
        q.k_ca = 1.5;
        CHECK_THROWS_AS(max_allowed_misalignment(q), ConfigError);
    }
}

TEST_CASE("pad survival probability") {
    CHECK(pad_pos(1.0, 0.0, 1.0) == doctest::Approx(0.682689492137).epsilon(1e-12));
    CHECK(pad_pos(0.23433138, 0.1, 0.05) == doctest::Approx(0.996391131290).epsilon(1e-10));

    SUBCASE("degenerate sigma is an indicator") {
        CHECK(pad_pos(0.3, 0.1, 0.0) == 1.0);
        CHECK(pad_pos(0.3, -0.1, 0.0) == 1.0);
        CHECK(pad_pos(0.3, 0.4, 0.0) == 0.0);
        CHECK(pad_pos(0.3, 0.3, 0.0) == 0.0);
    }

    SUBCASE("at the window edge the wide-window limit is one half") {
        CHECK(pad_pos(0.2, 0.2, 0.025) == doctest::Approx(0.5).epsilon(1e-9));
    }

    SUBCASE("symmetric in the sign of the systematic part") {
        for (double s : {0.01, 0.1, 0.3})
            CHECK(pad_pos(0.2, s, 0.05) == doctest::Approx(pad_pos(0.2, -s, 0.05)).epsilon(1e-13));
    }

    SUBCASE("non-increasing in |s|") {
        double prev = pad_pos(0.2, 0.0, 0.05);
        for (int i = 1; i <= 100; ++i) {
            double cur = pad_pos(0.2, 0.6 * i / 100.0, 0.05);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("die and wafer overlay yield") {
    DieSpec die;               // 10 mm x 10 mm
    WaferSpec wafer;           // 300 mm
    Layout full = build_layout(PatternKind::full, die, 400.0, 400.0, KindFractions{}, 1);

    SUBCASE("zero distortion with a wide window is survival 1") {
        OverlayParams p = baseline();
        p.tx_um = p.ty_um = 0.0;
        p.alpha_urad = 0.0;
        p.magnification_ppm = 0.0;
        p.k_ca = 0.0; // delta = 0.35
        CHECK(die_pos_overlay(full.grid, p, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("rotation past the corner kills a deterministic die") {
        OverlayParams p = baseline();
        p.sigma1_um = 0.0;
        p.tx_um = p.ty_um = 0.0;
        p.alpha_urad = 100.0; // 0.7 um at the die corner, beyond delta
        p.magnification_ppm = 0.0;
        CHECK(yield_ovl_d2w(full.grid, p) == 0.0);
    }

    SUBCASE("worst corner is the farthest functional corner under a radial field") {
        OverlayParams p = baseline();
        p.tx_um = p.ty_um = 0.0;
        p.alpha_urad = 3.0;
        p.magnification_ppm = 2.0;
        double rmax2 = 0.0;
        for (int r = 0; r < full.grid.rows(); ++r)
            for (int c = 0; c < full.grid.cols(); ++c) {
                if (!full.grid.is_functional(r, c)) continue;
                for (double x : {full.grid.cell_x0(c), full.grid.cell_x1(c)})
                    for (double y : {full.grid.cell_y0(r), full.grid.cell_y1(r)})
                        rmax2 = std::max(rmax2, x * x + y * y);
            }
        double expect = std::hypot(3.0e-6, 2.0e-6) * std::sqrt(rmax2);
        CHECK(max_functional_shift_um(full.grid, p, 0.0, 0.0) ==
              doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("wafer yield is the mean of independent per-die values") {
        OverlayParams p = baseline();
        p.sigma1_um = 0.05;
        p.alpha_urad = 20.0;
        double manual = 0.0;
        auto sites = generate_wafer_map(wafer, die);
        for (const DieSite& s : sites) manual += die_pos_overlay(full.grid, p, s.cx_um, s.cy_um);
        manual /= static_cast<double>(sites.size());
        CHECK(yield_ovl_w2w(wafer, die, full.grid, p) == doctest::Approx(manual).epsilon(1e-12));
        CHECK(manual > 0.0);
        CHECK(manual < 1.0);
    }

    SUBCASE("center die matches D2W; off-center dies fare worse radially") {
        OverlayParams p = baseline();
        p.tx_um = p.ty_um = 0.0;
        p.alpha_urad = 10.0;
        p.magnification_ppm = 5.0;
        p.sigma1_um = 0.05;
        double center = die_pos_overlay(full.grid, p, 0.0, 0.0);
        CHECK(yield_ovl_d2w(full.grid, p) == doctest::Approx(center).epsilon(1e-12));
        CHECK(die_pos_overlay(full.grid, p, 30000.0, 0.0) <= center);
        CHECK(die_pos_overlay(full.grid, p, 60000.0, -40000.0) <=
              die_pos_overlay(full.grid, p, 30000.0, 0.0));
    }

    SUBCASE("monotone degradation ladder") {
        auto w2w = [&](const OverlayParams& p) { return yield_ovl_w2w(wafer, die, full.grid, p); };
        OverlayParams base = baseline();
        base.sigma1_um = 0.05;
        base.tx_um = base.ty_um = 0.0;
        base.alpha_urad = 0.0;
        base.magnification_ppm = 0.0;

        auto ladder = [&](auto setter) {
            double prev = 2.0;
            for (double v : {0.0, 0.3, 0.6, 1.2}) {
                OverlayParams p = base;
                setter(p, v);
                double y = w2w(p);
                CHECK(y <= prev + 1e-12);
                prev = y;
            }
        };
        ladder([](OverlayParams& p, double v) { p.tx_um = 0.1 * v; });
        ladder([](OverlayParams& p, double v) { p.ty_um = -0.1 * v; });
        ladder([](OverlayParams& p, double v) { p.alpha_urad = 25.0 * v; });
        ladder([](OverlayParams& p, double v) { p.magnification_ppm = 15.0 * v; });
        ladder([](OverlayParams& p, double v) { p.sigma1_um = 0.05 + 0.1 * v; });
    }

    SUBCASE("no functional cell is a geometry error") {
        Layout dummy = full;
        for (int r = 0; r < dummy.grid.rows(); ++r)
            for (int c = 0; c < dummy.grid.cols(); ++c) dummy.grid.set(r, c, CellKind::dummy);
        OverlayParams p = baseline();
        CHECK_THROWS_AS(yield_ovl_d2w(dummy.grid, p), GeometryError);
    }
}

TEST_CASE("normal cdf tail accuracy") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.841344746068543).epsilon(1e-13));
    CHECK(normal_cdf(-2.5) == doctest::Approx(0.006209665325776132).epsilon(1e-13));
    CHECK(normal_cdf(5.0) == doctest::Approx(0.999999713348428).epsilon(1e-13));
    // deep lower tail keeps relative precision via erfc
    CHECK(normal_cdf(-10.0) == doctest::Approx(7.61985302416053e-24).epsilon(1e-12));
}
