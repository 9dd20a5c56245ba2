#include <doctest.h>

#include <cmath>
#include <vector>

#include "hbyield/errors.hpp"
#include "hbyield/layout.hpp"
#include "hbyield/recess.hpp"

using namespace hby;

namespace {

// Exhaustive-subset group survival: enumerate every intact/broken pattern of
// the member blocks and sum the probabilities of surviving patterns. Slow and
// blunt on purpose; it shares no algebra with the shipped log-space forms.
double group_survival_bruteforce(const std::vector<double>& block_alive, bool shared) {
    std::size_t k = block_alive.size();
    double total = 0.0;
    for (std::size_t mask = 0; mask < (1ull << k); ++mask) {
        double prob = 1.0;
        int dead_mains = 0;
        bool spare_alive = true;
        for (std::size_t m = 0; m < k; ++m) {
            bool alive = mask & (1ull << m);
            prob *= alive ? block_alive[m] : 1.0 - block_alive[m];
            if (shared && m + 1 == k)
                spare_alive = alive;
            else if (!alive)
                ++dead_mains;
        }
        bool survives = shared ? (dead_mains == 0 || (dead_mains == 1 && spare_alive))
                               : dead_mains < static_cast<int>(k);
        if (survives) total += prob;
    }
    return total;
}

double pads_of(const Layout& l, int r, int c, double pitch) {
    return static_cast<double>(pads_in_cell(l.grid, r, c, pitch));
}

} // namespace

TEST_CASE("adhesion parameter and bonding fraction") {
    RecessParams p;
    CHECK(adhesion_parameter(p) == doctest::Approx(1.665790).epsilon(1e-5));
    CHECK(effective_contact_area(p) == doctest::Approx(0.764341).epsilon(1e-5));

    SUBCASE("smooth surfaces bond fully") {
        p.sigma_z_nm = 1e-6;
        CHECK(effective_contact_area(p) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("rougher never bonds better") {
        double prev = 2.0;
        for (double sz : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            RecessParams q;
            q.sigma_z_nm = sz;
            double a = effective_contact_area(q);
            CHECK(a > 0.0);
            CHECK(a <= 1.0);
            CHECK(a < prev);
            prev = a;
        }
    }

    SUBCASE("curve override interpolates and clamps") {
        p.bond_curve = {{0.0, 1.0}, {10.0, 0.5}};
        double theta = adhesion_parameter(p);
        CHECK(effective_contact_area(p) == doctest::Approx(1.0 - 0.05 * theta).epsilon(1e-9));
        p.sigma_z_nm = 100.0; // far beyond the last knot
        CHECK(effective_contact_area(p) == doctest::Approx(0.5).epsilon(1e-12));
        p.bond_curve = {{1.0, 0.8}, {0.5, 0.9}};
        CHECK_THROWS_AS(effective_contact_area(p), ConfigError);
    }
}

TEST_CASE("tolerable peeling stress") {
    RecessParams p;
    p.bond_curve = {{0.0, 1.0}, {1e9, 1.0}}; // force full contact
    CHECK(tolerable_peeling_stress_mpa(p) == doctest::Approx(341.7601).epsilon(1e-5));

    SUBCASE("thickness scaling") {
        RecessParams q = p;
        q.t_d_um = 3.0;
        CHECK(tolerable_peeling_stress_mpa(q) ==
              doctest::Approx(341.7601 / std::sqrt(2.0)).epsilon(1e-5));
    }

    SUBCASE("linear in the bonding fraction") {
        RecessParams q = p;
        q.bond_curve = {{0.0, 0.5}, {1e9, 0.5}};
        CHECK(tolerable_peeling_stress_mpa(q) == doctest::Approx(0.5 * 341.7601).epsilon(1e-5));
    }

    SUBCASE("baseline curve value") {
        RecessParams q; // default curve
        CHECK(tolerable_peeling_stress_mpa(q) == doctest::Approx(261.2212).epsilon(1e-5));
    }
}

TEST_CASE("height survival window") {
    RecessParams p;
    const double d_cu_full = 0.19634954;

    HeightBounds b = height_bounds(p, d_cu_full);
    CHECK(b.zeta_minus_nm == doctest::Approx(-40.0).epsilon(1e-12));
    CHECK(b.h_peel_nm == doctest::Approx(278.1127).epsilon(1e-4));
    CHECK(b.zeta_plus_nm == 0.0);

    SUBCASE("no expansion budget collapses the lower bound") {
        RecessParams q;
        q.cu_expansion_nm = 0.0;
        CHECK(height_bounds(q, d_cu_full).zeta_minus_nm == 0.0);
    }

    SUBCASE("vanishing density leaves the protrusion bound binding") {
        CHECK(height_bounds(p, 1e-9).zeta_plus_nm == 0.0);
    }

    SUBCASE("negative onset height can invert the window") {
        RecessParams q;
        q.h0_nm = -300.0;
        HeightBounds hb = height_bounds(q, d_cu_full);
        CHECK(hb.zeta_plus_nm < 0.0);
        CHECK(hb.zeta_plus_nm == doctest::Approx(hb.h_peel_nm).epsilon(1e-12));
        q.cu_expansion_nm = 40.0; // zeta- = -40 > zeta+ ~= -97: inverted
        CHECK(pad_fail_recess(q, d_cu_full) == 1.0);
        CHECK(pad_pos_recess(q, d_cu_full) == 0.0);
    }

    SUBCASE("density bounds are validated") {
        CHECK_THROWS_AS(height_bounds(p, 0.0), ConfigError);
        CHECK_THROWS_AS(height_bounds(p, 1.5), ConfigError);
    }
}

TEST_CASE("pad survival probability under recess") {
    RecessParams p;
    const double d_cu = 0.19634954;

    // both tails sit 14.14 sigma out at the baseline
    CHECK(pad_fail_recess(p, d_cu) == doctest::Approx(2.088488e-45).epsilon(1e-4));
    CHECK(pad_pos_recess(p, d_cu) == doctest::Approx(1.0).epsilon(1e-15));

    SUBCASE("moderate spread reference value") {
        RecessParams q;
        q.sigma_top_nm = q.sigma_bot_nm = 3.0 / std::sqrt(2.0); // sigma_h = 3
        CHECK(pad_fail_recess(q, d_cu) == doctest::Approx(2.616784937211e-11).epsilon(1e-6));
        CHECK(pad_pos_recess(q, d_cu) == doctest::Approx(0.999999999974).epsilon(1e-12));
    }

    SUBCASE("survival peaks when the mean centers the window") {
        RecessParams q;
        q.sigma_top_nm = q.sigma_bot_nm = 5.0;
        auto pos_at = [&](double mu_each) {
            RecessParams r = q;
            r.mu_top_nm = r.mu_bot_nm = mu_each;
            return pad_pos_recess(r, d_cu);
        };
        double centered = pos_at(-10.0); // mu_h = -20, window (-40, 0)
        for (double mu : {-16.0, -13.0, -7.0, -4.0}) CHECK(pos_at(mu) < centered);
    }

    SUBCASE("diffuse heights survive with vanishing probability") {
        RecessParams q;
        q.sigma_top_nm = q.sigma_bot_nm = 1e5;
        CHECK(pad_pos_recess(q, d_cu) < 1e-3);
    }

    SUBCASE("degenerate spread is an indicator") {
        RecessParams q;
        q.sigma_top_nm = q.sigma_bot_nm = 0.0;
        CHECK(pad_fail_recess(q, d_cu) == 0.0); // mu_h = -20 inside (-40, 0)
        q.mu_top_nm = q.mu_bot_nm = -30.0;      // mu_h = -60 below zeta-
        CHECK(pad_fail_recess(q, d_cu) == 1.0);
    }

    SUBCASE("roughness chain: rougher surfaces never help") {
        RecessParams q;
        q.h0_nm = -150.0;
        q.cu_expansion_nm = 150.0;
        q.mu_top_nm = q.mu_bot_nm = -50.0;
        q.sigma_top_nm = q.sigma_bot_nm = 30.0 / std::sqrt(2.0);
        double prev = -1.0;
        for (double sz : {0.5, 1.0, 1.8, 2.2, 3.0, 4.0}) {
            RecessParams r = q;
            r.sigma_z_nm = sz;
            double f = pad_fail_recess(r, 0.19634954);
            CHECK(f >= prev - 1e-15);
            prev = f;
        }
        CHECK(prev > 0.5); // the ladder actually traversed the window collapse
    }

    SUBCASE("denser Cu never helps") {
        RecessParams q;
        q.h0_nm = -150.0;
        q.cu_expansion_nm = 150.0;
        q.mu_top_nm = q.mu_bot_nm = -50.0;
        q.sigma_top_nm = q.sigma_bot_nm = 30.0 / std::sqrt(2.0);
        q.sigma_z_nm = 1.8;
        double prev = -1.0;
        for (double d : {0.05, 0.1, 0.2, 0.4, 0.8}) {
            double f = pad_fail_recess(q, d);
            CHECK(f >= prev - 1e-15);
            prev = f;
        }
    }
}

TEST_CASE("die yield under recess") {
    SUBCASE("a million critical pads") {
        DieSpec die{1000.0, 1000.0};
        Layout l = build_layout(PatternKind::full, die, 250.0, 250.0, KindFractions{}, 1);
        REQUIRE(pads_per_full_cell(l.grid, 1.0) == 62500);
        CHECK(yield_recess(l, 1.0, 1e-8) == doctest::Approx(0.99004983).epsilon(1e-8));
        CHECK(yield_recess(l, 1.0, 0.0) == 1.0);
        CHECK(yield_recess(l, 1.0, 1.0) == 0.0);
    }

    SUBCASE("log-space evaluation matches direct powers") {
        DieSpec die{100.0, 10.0};
        Layout l = build_layout(PatternKind::full, die, 10.0, 10.0, KindFractions{}, 1);
        double direct = std::pow(1.0 - 0.01, 1000.0);
        CHECK(yield_recess(l, 1.0, 0.01) == doctest::Approx(direct).epsilon(1e-12));
    }

    SUBCASE("dedicated pairs match subset enumeration") {
        DieSpec die{200.0, 200.0};
        Layout l;
        l.grid = PadBlockGrid(die, 100.0, 100.0);
        l.grid.set(0, 0, CellKind::critical);
        l.grid.set(0, 1, CellKind::redundant, 0);
        l.grid.set(1, 0, CellKind::redundant, 0);
        l.grid.set(1, 1, CellKind::dummy);
        l.plan.scheme = RedundancyScheme::dedicated;
        l.plan.groups = {RedundancyGroup{{{CellRef{0, 1}}, {CellRef{1, 0}}}}};
        validate(l);

        double f = 1e-3, pitch = 1.0;
        double s_cell = std::exp(pads_of(l, 0, 1, pitch) * std::log1p(-f));
        double expect = std::exp(pads_of(l, 0, 0, pitch) * std::log1p(-f)) *
                        group_survival_bruteforce({s_cell, s_cell}, false);
        CHECK(yield_recess(l, pitch, f) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("more replicas never hurt") {
        DieSpec die{300.0, 100.0};
        auto with_members = [&](int members) {
            Layout l;
            l.grid = PadBlockGrid(die, 100.0, 100.0);
            RedundancyGroup g;
            for (int c = 0; c < 3; ++c) {
                if (c < members) {
                    l.grid.set(0, c, CellKind::redundant, 0);
                    g.members.push_back({CellRef{0, c}});
                } else {
                    l.grid.set(0, c, CellKind::dummy);
                }
            }
            l.plan.scheme = RedundancyScheme::dedicated;
            l.plan.groups = {g};
            validate(l);
            return yield_recess(l, 1.0, 2e-4);
        };
        CHECK(with_members(3) > with_members(2));
    }

    SUBCASE("shared groups match subset enumeration") {
        DieSpec die{2000.0, 2000.0};
        Layout l = build_shared_redundant_layout(die, 200.0, 6);
        double f = 1e-6, pitch = 1.0;

        double expect_log = 0.0;
        for (int r = 0; r < l.grid.rows(); ++r)
            for (int c = 0; c < l.grid.cols(); ++c)
                if (l.grid.kind(r, c) == CellKind::critical)
                    expect_log += pads_of(l, r, c, pitch) * std::log1p(-f);
        for (const RedundancyGroup& g : l.plan.groups) {
            std::vector<double> alive;
            for (const auto& member : g.members) {
                double pads = 0.0;
                for (const CellRef& cell : member) pads += pads_of(l, cell.row, cell.col, pitch);
                alive.push_back(std::exp(pads * std::log1p(-f)));
            }
            expect_log += std::log(group_survival_bruteforce(alive, true));
        }
        CHECK(yield_recess(l, pitch, f) == doctest::Approx(std::exp(expect_log)).epsilon(1e-9));
        CHECK(yield_recess(l, pitch, f) < 1.0);
    }

    SUBCASE("full baseline is survival 1 to machine precision") {
        DieSpec die;
        Layout l = build_layout(PatternKind::full, die, 400.0, 400.0, KindFractions{}, 1);
        RecessParams p;
        double d_cu = cu_pattern_density(l.grid, 1.0, 0.5);
        CHECK(yield_recess(l, p, d_cu, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("more critical pads never help") {
        DieSpec die{1000.0, 1000.0};
        Layout small = build_layout(PatternKind::full, DieSpec{500.0, 1000.0}, 250.0, 250.0,
                                    KindFractions{}, 1);
        Layout large = build_layout(PatternKind::full, die, 250.0, 250.0, KindFractions{}, 1);
        CHECK(yield_recess(large, 1.0, 1e-7) < yield_recess(small, 1.0, 1e-7));
    }
}
