#include "ladderkit/io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "csv.hpp"
#include "ladderkit/errors.hpp"

namespace ladderkit {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

json ladder_json(const Ladder& ladder) {
    json rungs = json::array();
    for (const auto& r : ladder.rungs) {
        json j = {{"rate_kbps", r.rate_kbps}, {"vmaf", r.vmaf}, {"qp", r.qp}, {"resolution", label(r.resolution)}};
        if (r.below_front) j["below_front"] = true;
        rungs.push_back(std::move(j));
    }
    json j = {{"sequence", ladder.sequence_id}, {"rungs", std::move(rungs)}};
    if (!ladder.target_rates.empty()) j["target_rates"] = ladder.target_rates;
    return j;
}

Ladder ladder_from_json(const json& j) {
    Ladder l;
    l.sequence_id = j.at("sequence").get<std::string>();
    if (j.contains("target_rates")) l.target_rates = j.at("target_rates").get<std::vector<double>>();
    for (const auto& r : j.at("rungs")) {
        Rung rung;
        rung.rate_kbps = r.at("rate_kbps").get<double>();
        rung.vmaf = r.at("vmaf").get<double>();
        rung.qp = r.at("qp").get<int>();
        rung.resolution = parse_resolution(r.at("resolution").get<std::string>());
        rung.below_front = r.value("below_front", false);
        l.rungs.push_back(rung);
    }
    return l;
}

json per_resolution_json(const PerResolution<std::vector<int>>& v) {
    json j = json::object();
    for (Resolution r : kResolutionsDescending) j[std::string(label(r))] = v[r];
    return j;
}

}  // namespace

void save_ladder_json(const Ladder& ladder, const std::filesystem::path& path) {
    open_out(path) << ladder_json(ladder).dump(1) << '\n';
}

Ladder load_ladder_json(const std::filesystem::path& path) {
    try {
        return ladder_from_json(read_json(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

std::map<std::string, Ladder> load_ladder_dir(const std::filesystem::path& dir) {
    std::filesystem::path d = dir;
    if (std::filesystem::is_directory(d / "ladders")) d /= "ladders";
    if (!std::filesystem::is_directory(d)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(d))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::map<std::string, Ladder> out;
    for (const auto& f : files) {
        Ladder l = load_ladder_json(f);
        const std::string id = l.sequence_id;
        if (!out.emplace(id, std::move(l)).second) throw ConflictError("sequence " + id + " appears twice in " + d.string());
    }
    return out;
}

void save_ladders_csv(const std::vector<Ladder>& ladders, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence,rung,rate_kbps,vmaf,qp,resolution\n";
    for (const auto& l : ladders)
        for (std::size_t i = 0; i < l.rungs.size(); ++i) {
            const Rung& r = l.rungs[i];
            out << l.sequence_id << ',' << i << ',' << format_double(r.rate_kbps) << ',' << format_double(r.vmaf) << ','
                << r.qp << ',' << label(r.resolution) << '\n';
        }
}

std::vector<Ladder> load_ladders_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const int cs = t.require("sequence"), cr = t.require("rate_kbps"), cv = t.require("vmaf"), cq = t.require("qp"),
              cres = t.require("resolution");
    std::vector<Ladder> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.line_numbers[i];
        if (out.empty() || out.back().sequence_id != row[cs]) {
            out.emplace_back();
            out.back().sequence_id = row[cs];
        }
        Rung r;
        r.rate_kbps = csv::to_double(row[cr], line, "rate_kbps");
        r.vmaf = csv::to_double(row[cv], line, "vmaf");
        r.qp = csv::to_int(row[cq], line, "qp");
        try {
            r.resolution = parse_resolution(row[cres]);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line);
        }
        out.back().rungs.push_back(r);
    }
    return out;
}

void save_knee_table(const KneeTable& knees, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence";
    for (Resolution r : kResolutionsDescending) out << ",knee_" << label(r);
    out << '\n';
    for (const auto& [seq, k] : knees) {
        out << seq;
        for (Resolution r : kResolutionsDescending) out << ',' << format_double(k[r]);
        out << '\n';
    }
}

KneeTable load_knee_table(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const int cs = t.require("sequence");
    std::array<int, 4> cols{};
    for (std::size_t i = 0; i < kResolutionsDescending.size(); ++i)
        cols[i] = t.require("knee_" + std::string(label(kResolutionsDescending[i])));
    KneeTable out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        PerResolution<double> k;
        for (std::size_t j = 0; j < cols.size(); ++j)
            k[kResolutionsDescending[j]] = csv::to_double(t.rows[i][cols[j]], t.line_numbers[i], "knee QP");
        if (!out.emplace(t.rows[i][cs], k).second)
            throw ConflictError("duplicate sequence " + t.rows[i][cs] + " in " + path.string());
    }
    return out;
}

namespace {

const std::array<std::string, 6> kCrossoverColumns = {"qp_high_2160p", "qp_low_1080p", "qp_high_1080p",
                                                      "qp_low_720p",   "qp_high_720p", "qp_low_540p"};

}  // namespace

void save_crossover_table(const CrossoverTable& xs, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence";
    for (const auto& c : kCrossoverColumns) out << ',' << c;
    out << '\n';
    for (const auto& [seq, x] : xs) {
        out << seq;
        for (double v : x.values) out << ',' << format_double(v);
        out << '\n';
    }
}

CrossoverTable load_crossover_table(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const int cs = t.require("sequence");
    std::array<int, 6> cols{};
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = t.require(kCrossoverColumns[j]);
    CrossoverTable out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CrossoverQps x;
        for (std::size_t j = 0; j < cols.size(); ++j)
            x.values[j] = csv::to_double(t.rows[i][cols[j]], t.line_numbers[i], "cross-over QP");
        if (!out.emplace(t.rows[i][cs], x).second)
            throw ConflictError("duplicate sequence " + t.rows[i][cs] + " in " + path.string());
    }
    return out;
}

void save_tally_csv(const std::map<std::string, std::size_t>& tally, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "sequence,tally\n";
    for (const auto& [seq, n] : tally) out << seq << ',' << n << '\n';
}

std::map<std::string, std::size_t> load_tally_csv(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const int cs = t.require("sequence"), ct = t.require("tally");
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const int n = csv::to_int(t.rows[i][ct], t.line_numbers[i], "tally");
        if (n < 0) throw ParseError("negative tally", t.line_numbers[i]);
        out[t.rows[i][cs]] = static_cast<std::size_t>(n);
    }
    return out;
}

void save_synthetic_params(const std::map<std::string, SyntheticCurveParams>& params,
                           const std::filesystem::path& path) {
    json doc = json::object();
    for (const auto& [seq, p] : params) {
        json curves = json::object();
        for (Resolution r : kResolutionsDescending) {
            const LogisticCurve& c = p.curves[r];
            curves[std::string(label(r))] = {{"v_max", c.v_max}, {"mu", c.mu}, {"sigma_s", c.sigma_s},
                                             {"a", c.a},         {"b", c.b},   {"c", c.c}};
        }
        doc[seq] = {{"curves", std::move(curves)}, {"noise_sigma", p.noise_sigma}, {"seed", p.seed}};
    }
    open_out(path) << doc.dump(1) << '\n';
}

std::map<std::string, SyntheticCurveParams> load_synthetic_params(const std::filesystem::path& path) {
    const json doc = read_json(path);
    std::map<std::string, SyntheticCurveParams> out;
    try {
        for (const auto& [seq, j] : doc.items()) {
            SyntheticCurveParams p;
            for (Resolution r : kResolutionsDescending) {
                const json& c = j.at("curves").at(std::string(label(r)));
                LogisticCurve& lc = p.curves[r];
                lc.v_max = c.at("v_max").get<double>();
                lc.mu = c.at("mu").get<double>();
                lc.sigma_s = c.at("sigma_s").get<double>();
                lc.a = c.at("a").get<double>();
                lc.b = c.at("b").get<double>();
                lc.c = c.value("c", 0.0);
            }
            p.noise_sigma = j.value("noise_sigma", 0.0);
            p.seed = j.value("seed", std::uint64_t{0});
            check_params(p);
            out.emplace(seq, p);
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
    return out;
}

void save_estimate_report(const EstimateResult& result, const MethodConfig& cfg, const std::filesystem::path& path) {
    json config = {{"method", method_name(cfg.method)},
                   {"qp_min", cfg.qp_range.min},
                   {"qp_max", cfg.qp_range.max},
                   {"r_min_kbps", cfg.ladder.r_min_kbps},
                   {"r_max_kbps", cfg.ladder.r_max_kbps},
                   {"v_high", cfg.ladder.v_high},
                   {"epsilon_per_kbps", cfg.ladder.epsilon_per_kbps}};
    if (cfg.method == Method::cil) {
        config["n"] = cfg.cil_n;
        json offsets = json::object();
        for (Resolution r : kResolutionsDescending) offsets[std::string(label(r))] = cfg.cil_offsets[r];
        config["offsets"] = std::move(offsets);
    } else if (cfg.method == Method::nil) {
        config["nil_qps"] = per_resolution_json(cfg.nil_qps);
    } else if (cfg.method == Method::fl) {
        config["fl_2160p"] = {{"qp_m", cfg.fl_2160.qp_m}, {"delta", cfg.fl_2160.delta}};
        config["fl_540p"] = {{"qp_m", cfg.fl_540.qp_m}, {"delta", cfg.fl_540.delta}};
    }
    json doc = {{"sequence", result.sequence_id},
                {"method", method_name(result.method)},
                {"config", std::move(config)},
                {"tally", result.tally},
                {"budget", method_budget(result.method, cfg, cfg.targets().size())},
                {"qp_sets", per_resolution_json(result.initial_qps)},
                {"ladder", ladder_json(result.ladder)},
                {"warnings", result.warnings}};
    open_out(path) << doc.dump(1) << '\n';
}

}  // namespace ladderkit
