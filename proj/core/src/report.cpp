#include "hbyield/report.hpp"

#include <fstream>

#include <json.hpp>

#include "hbyield/errors.hpp"

namespace hby {

std::string to_json(const YieldReport& r) {
    nlohmann::ordered_json j;
    j["y_ovl"] = r.y_ovl;
    j["y_cr"] = r.y_cr;
    j["y_df"] = r.y_df;
    j["y_total"] = r.y_total;
    j["source"] = r.source;
    j["runtime_s"] = r.runtime_s;
    j["seed"] = r.seed;
    j["n_wafers"] = r.n_wafers;
    j["n_dies"] = r.n_dies;
    j["cv"] = r.cv;
    return j.dump(2) + "\n";
}

YieldReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed report JSON");
    YieldReport r;
    try {
        r.y_ovl = j.at("y_ovl").get<double>();
        r.y_cr = j.at("y_cr").get<double>();
        r.y_df = j.at("y_df").get<double>();
        r.y_total = j.at("y_total").get<double>();
        r.source = j.at("source").get<std::string>();
        r.runtime_s = j.at("runtime_s").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.n_wafers = j.at("n_wafers").get<std::uint64_t>();
        r.n_dies = j.at("n_dies").get<std::uint64_t>();
        r.cv = j.at("cv").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad report JSON: ") + e.what());
    }
    return r;
}

void save_report_json(const YieldReport& r, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw ConfigError("cannot write report file '" + path + "'");
    f << to_json(r);
}

} // namespace hby
