#include "reliefscan/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reliefscan/eval.hpp"
#include "reliefscan/hmap_io.hpp"
#include "reliefscan/rng.hpp"
#include "reliefscan/report.hpp"
#include "reliefscan/stats.hpp"
#include "reliefscan/synth.hpp"

namespace reliefscan::cli {

namespace {

const std::set<std::string> kKnownKeys = {
    "manifest",      "out",           "seed",        "ladder",
    "regimes",       "n_perm",        "lr",          "epochs",
    "batch_px",      "patience",      "val_frac",    "augment_copies",
    "max_px_per_sample", "synth_width", "synth_height", "synth_pitch_um",
    "synth_dropout_frac", "synth_n_per_papyrus"};

const std::vector<std::string> kAllRegimes = {"matched", "cross_res", "zbin", "lopo"};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

template <typename T>
T parse_num(const std::string& s, const std::string& key) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("config: invalid numeric value for '" + key + "': " + s);
    return v;
}

std::vector<int> parse_ladder(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split_list(s)) out.push_back(parse_num<int>(tok, "ladder"));
    if (out.empty()) throw std::runtime_error("config: empty ladder");
    return out;
}

std::vector<std::string> parse_regimes(const std::string& s) {
    auto out = split_list(s);
    for (const auto& r : out)
        if (std::find(kAllRegimes.begin(), kAllRegimes.end(), r) == kAllRegimes.end())
            throw std::runtime_error("config: unknown regime '" + r + "'");
    if (out.empty()) throw std::runtime_error("config: empty regimes list");
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit(const std::filesystem::path& p) { std::cout << "wrote " << p.string() << "\n"; }

// configuration + seeds echoed into the output dir so every byte is reproducible
void echo_provenance(const RunConfig& cfg, const std::string& subcommand) {
    std::filesystem::create_directories(cfg.out);
    if (!cfg.raw_text.empty()) {
        auto p = cfg.out / ("config_input_" + subcommand + ".txt");
        write_text(p, cfg.raw_text);
        emit(p);
    }
    auto p = cfg.out / ("config_used_" + subcommand + ".txt");
    write_text(p, cfg.canonical());
    emit(p);
}

eval::ExperimentConfig experiment_config(const RunConfig& cfg) {
    eval::ExperimentConfig e;
    e.ladder = resample::PitchLadder::from_kernels(cfg.ladder, cfg.synth_pitch_um);
    e.seed = cfg.seed;
    e.hyper.lr = cfg.lr;
    e.hyper.epochs = cfg.epochs;
    e.hyper.batch_px = cfg.batch_px;
    e.hyper.patience = cfg.patience;
    e.hyper.val_frac = cfg.val_frac;
    e.hyper.augment_copies = cfg.augment_copies;
    e.hyper.max_px_per_sample = cfg.max_px_per_sample;
    return e;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.raw_text = text;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config " + origin + " line " + std::to_string(line_no) +
                                     ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!kKnownKeys.count(key))
            throw std::runtime_error("config " + origin + " line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        if (key == "manifest") cfg.manifest = value;
        else if (key == "out") cfg.out = value;
        else if (key == "seed") cfg.seed = parse_num<uint64_t>(value, key);
        else if (key == "ladder") cfg.ladder = parse_ladder(value);
        else if (key == "regimes") cfg.regimes = parse_regimes(value);
        else if (key == "n_perm") cfg.n_perm = parse_num<int>(value, key);
        else if (key == "lr") cfg.lr = parse_num<double>(value, key);
        else if (key == "epochs") cfg.epochs = parse_num<int>(value, key);
        else if (key == "batch_px") cfg.batch_px = parse_num<int>(value, key);
        else if (key == "patience") cfg.patience = parse_num<int>(value, key);
        else if (key == "val_frac") cfg.val_frac = parse_num<double>(value, key);
        else if (key == "augment_copies") cfg.augment_copies = parse_num<int>(value, key);
        else if (key == "max_px_per_sample") cfg.max_px_per_sample = parse_num<int>(value, key);
        else if (key == "synth_width") cfg.synth_width = parse_num<int>(value, key);
        else if (key == "synth_height") cfg.synth_height = parse_num<int>(value, key);
        else if (key == "synth_pitch_um") cfg.synth_pitch_um = parse_num<double>(value, key);
        else if (key == "synth_dropout_frac") cfg.synth_dropout_frac = parse_num<double>(value, key);
        else if (key == "synth_n_per_papyrus") cfg.synth_n_per_papyrus = parse_num<int>(value, key);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string RunConfig::canonical() const {
    std::ostringstream out;
    out << "manifest = " << manifest.string() << "\n";
    out << "out = " << this->out.string() << "\n";
    out << "seed = " << seed << "\n";
    out << "ladder = ";
    for (size_t i = 0; i < ladder.size(); ++i) out << (i ? "," : "") << ladder[i];
    out << "\nregimes = ";
    for (size_t i = 0; i < regimes.size(); ++i) out << (i ? "," : "") << regimes[i];
    out << "\nn_perm = " << n_perm << "\n";
    out << "lr = " << io::format_double(lr) << "\n";
    out << "epochs = " << epochs << "\n";
    out << "batch_px = " << batch_px << "\n";
    out << "patience = " << patience << "\n";
    out << "val_frac = " << io::format_double(val_frac) << "\n";
    out << "augment_copies = " << augment_copies << "\n";
    out << "max_px_per_sample = " << max_px_per_sample << "\n";
    out << "synth_width = " << synth_width << "\n";
    out << "synth_height = " << synth_height << "\n";
    out << "synth_pitch_um = " << io::format_double(synth_pitch_um) << "\n";
    out << "synth_dropout_frac = " << io::format_double(synth_dropout_frac) << "\n";
    out << "synth_n_per_papyrus = " << synth_n_per_papyrus << "\n";
    return out.str();
}

void apply_overrides(RunConfig& cfg, const CliOverrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.regimes) cfg.regimes = parse_regimes(*o.regimes);
    if (o.ladder) cfg.ladder = parse_ladder(*o.ladder);
}

void cmd_synth(const RunConfig& cfg) {
    if (cfg.out.empty()) throw std::runtime_error("synth: 'out' directory is required");
    echo_provenance(cfg, "synth");

    synth::SynthConfig base;
    base.seed = cfg.seed;
    base.width = cfg.synth_width;
    base.height = cfg.synth_height;
    base.pitch_um = cfg.synth_pitch_um;
    base.dropout_frac = cfg.synth_dropout_frac;

    auto papyri = synth::default_papyri();
    if (cfg.synth_n_per_papyrus > 0)
        for (auto& p : papyri) p.n_samples = 0;  // let the override drive the counts

    auto corpus_dir = cfg.out / "corpus";
    auto manifest = synth::generate_corpus(base, papyri, corpus_dir, cfg.synth_n_per_papyrus);
    emit(corpus_dir / "manifest.csv");

    auto papyri_ids = manifest.papyrus_ids();
    std::cout << "corpus: " << manifest.entries.size() << " samples across " << papyri_ids.size()
              << " papyri (";
    for (size_t i = 0; i < papyri_ids.size(); ++i) std::cout << (i ? ", " : "") << papyri_ids[i];
    std::cout << ")\n";
}

void cmd_run(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw std::runtime_error("run: 'manifest' is required");
    if (cfg.out.empty()) throw std::runtime_error("run: 'out' directory is required");
    echo_provenance(cfg, "run");

    auto manifest = io::read_manifest(cfg.manifest);
    eval::Engine engine(manifest, experiment_config(cfg));

    auto want = [&](const std::string& r) {
        return std::find(cfg.regimes.begin(), cfg.regimes.end(), r) != cfg.regimes.end();
    };

    // missingness controls come from the raw maps regardless of regimes
    {
        auto p = cfg.out / "missingness.csv";
        std::ofstream out(p, std::ios::binary);
        out << "sample_id,papyrus_id,frac_total,frac_ink,frac_papyrus,dice_missing_vs_ink\n";
        const auto& ms = engine.missingness();
        for (size_t i = 0; i < manifest.entries.size(); ++i)
            out << manifest.entries[i].sample_id << ',' << manifest.entries[i].papyrus_id << ','
                << io::format_double(ms[i].frac_total) << ',' << io::format_double(ms[i].frac_ink)
                << ',' << io::format_double(ms[i].frac_papyrus) << ','
                << io::format_double(ms[i].dice_missing_vs_ink) << "\n";
        emit(p);
    }

    if (want("matched")) {
        auto t = engine.run_matched();
        eval::write_results_csv(t, cfg.out / "results_matched.csv");
        emit(cfg.out / "results_matched.csv");
    }
    if (want("cross_res")) {
        auto t = engine.run_cross_res();
        eval::write_results_csv(t, cfg.out / "results_cross_res.csv");
        emit(cfg.out / "results_cross_res.csv");
    }
    if (want("zbin")) {
        auto t = engine.run_zbin();
        eval::write_results_csv(t, cfg.out / "results_zbin.csv");
        emit(cfg.out / "results_zbin.csv");
    }
    if (want("lopo")) {
        auto t = engine.run_lopo();
        eval::write_results_csv(t, cfg.out / "results_lopo.csv");
        emit(cfg.out / "results_lopo.csv");
    }
}

namespace {

struct RegimeData {
    std::vector<double> pitches;                      // ladder order
    std::map<std::string, std::vector<double>> by_sample;  // sample -> dice per pitch
    std::map<double, std::vector<double>> by_pitch;
};

RegimeData organize(const eval::ResultTable& t) {
    RegimeData d;
    for (const auto& r : t.rows) {
        if (std::find(d.pitches.begin(), d.pitches.end(), r.pitch_um) == d.pitches.end())
            d.pitches.push_back(r.pitch_um);
        d.by_pitch[r.pitch_um].push_back(r.dice);
    }
    for (const auto& r : t.rows) d.by_sample[r.sample_id].push_back(r.dice);
    return d;
}

nlohmann::json report_json(const stats::TestReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["n"] = r.n;
    j["k"] = r.k;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

nlohmann::json summary_json(const stats::Summary& s) {
    return {{"median", s.median}, {"q1", s.q1},     {"q3", s.q3},
            {"mean", s.mean},     {"sd", s.sd},     {"n", s.n}};
}

std::string pitch_label(double p) { return io::format_double(p); }

}  // namespace

void cmd_stats(const RunConfig& cfg) {
    if (cfg.out.empty()) throw std::runtime_error("stats: 'out' directory is required");
    echo_provenance(cfg, "stats");

    nlohmann::json j;
    std::string summary_csv = "regime,group,n,median,q1,q3,mean,sd\n";

    auto want = [&](const std::string& r) {
        return std::find(cfg.regimes.begin(), cfg.regimes.end(), r) != cfg.regimes.end();
    };

    for (const std::string regime : {"matched", "cross_res", "zbin"}) {
        if (!want(regime)) continue;
        auto path = cfg.out / ("results_" + regime + ".csv");
        if (!std::filesystem::exists(path))
            throw std::runtime_error("stats: missing input CSV for regime '" + regime +
                                     "': expected " + path.string() + " (run 'run' first)");
        auto table = eval::read_results_csv(path);
        RegimeData d = organize(table);

        nlohmann::json jr;
        for (double p : d.pitches) {
            auto s = stats::summarize(d.by_pitch.at(p));
            jr["summaries"].push_back(
                {{"pitch_um", p}, {"summary", summary_json(s)}});
            summary_csv += regime + "," + pitch_label(p) + "," + std::to_string(s.n) + "," +
                           io::format_double(s.median) + "," + io::format_double(s.q1) + "," +
                           io::format_double(s.q3) + "," + io::format_double(s.mean) + "," +
                           io::format_double(s.sd) + "\n";
        }

        if (d.pitches.size() >= 2) {
            // subjects must appear in every condition
            stats::PairedMatrix m;
            m.n_conditions = d.pitches.size();
            for (double p : d.pitches) m.condition_labels.push_back(pitch_label(p));
            for (const auto& [sample, vals] : d.by_sample) {
                if (vals.size() != d.pitches.size())
                    throw std::runtime_error("stats: sample '" + sample +
                                             "' is missing some pitches in " + path.string());
                m.values.insert(m.values.end(), vals.begin(), vals.end());
                ++m.n_subjects;
            }

            try {
                jr["friedman"] = report_json(stats::friedman(m));
            } catch (const std::invalid_argument& e) {
                jr["friedman"] = {{"method", "friedman"}, {"degenerate", true}, {"note", e.what()}};
            }

            // decreasing trend: hypothesized order lists coarsest (expected smallest) first
            std::vector<std::string> order(m.condition_labels.rbegin(), m.condition_labels.rend());
            jr["pages_l"] =
                report_json(stats::pages_l(m, order, cfg.n_perm, derive_seed(cfg.seed, {0x70})));

            // pairwise contrasts with Holm over the whole family
            std::vector<std::pair<size_t, size_t>> contrasts;
            for (size_t a = 0; a < d.pitches.size(); ++a)
                for (size_t b = a + 1; b < d.pitches.size(); ++b) contrasts.push_back({a, b});
            std::vector<double> raw_p(contrasts.size(), 1.0);
            std::vector<nlohmann::json> rows(contrasts.size());
            for (size_t c = 0; c < contrasts.size(); ++c) {
                auto [a, b] = contrasts[c];
                std::vector<double> xa, xb;
                for (const auto& [sample, vals] : d.by_sample) {
                    xa.push_back(vals[a]);
                    xb.push_back(vals[b]);
                }
                nlohmann::json row;
                row["a"] = m.condition_labels[a];
                row["b"] = m.condition_labels[b];
                try {
                    auto w = stats::wilcoxon_signed_rank(xa, xb);
                    raw_p[c] = w.p_value;
                    row["W"] = w.statistic;
                    row["p"] = w.p_value;
                    row["note"] = w.note;
                } catch (const std::invalid_argument& e) {
                    raw_p[c] = 1.0;
                    row["p"] = 1.0;
                    row["note"] = std::string("degenerate: ") + e.what();
                }
                rows[c] = std::move(row);
            }
            auto adj = stats::holm_adjust(raw_p);
            for (size_t c = 0; c < contrasts.size(); ++c) {
                rows[c]["p_holm"] = adj[c];
                jr["pairwise_wilcoxon"].push_back(rows[c]);
            }
        }
        j[regime] = std::move(jr);
    }

    if (want("lopo")) {
        auto path = cfg.out / "results_lopo.csv";
        if (!std::filesystem::exists(path))
            throw std::runtime_error("stats: missing input CSV for regime 'lopo': expected " +
                                     path.string() + " (run 'run' first)");
        auto table = eval::read_results_csv(path);
        std::map<std::string, std::vector<double>> by_papyrus;
        std::vector<double> pooled;
        for (const auto& r : table.rows) {
            by_papyrus[r.papyrus_id].push_back(r.dice);
            pooled.push_back(r.dice);
        }
        nlohmann::json jr;
        for (const auto& [pap, vals] : by_papyrus) {
            auto s = stats::summarize(vals);
            jr["per_papyrus"].push_back({{"papyrus", pap}, {"summary", summary_json(s)}});
            summary_csv += "lopo," + pap + "," + std::to_string(s.n) + "," +
                           io::format_double(s.median) + "," + io::format_double(s.q1) + "," +
                           io::format_double(s.q3) + "," + io::format_double(s.mean) + "," +
                           io::format_double(s.sd) + "\n";
        }
        auto s = stats::summarize(pooled);
        jr["pooled"] = summary_json(s);
        summary_csv += "lopo,pooled," + std::to_string(s.n) + "," + io::format_double(s.median) +
                       "," + io::format_double(s.q1) + "," + io::format_double(s.q3) + "," +
                       io::format_double(s.mean) + "," + io::format_double(s.sd) + "\n";
        j["lopo"] = std::move(jr);
    }

    // missingness controls
    {
        auto path = cfg.out / "missingness.csv";
        if (std::filesystem::exists(path)) {
            std::ifstream in(path);
            std::string line;
            std::getline(in, line);  // header
            std::vector<double> frac_total, frac_ink, frac_papyrus, dice_mi;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::vector<std::string> f;
                std::string cur;
                for (char c : line) {
                    if (c == ',') {
                        f.push_back(cur);
                        cur.clear();
                    } else if (c != '\r') {
                        cur += c;
                    }
                }
                f.push_back(cur);
                if (f.size() != 6) throw std::runtime_error("bad missingness row in " + path.string());
                frac_total.push_back(std::stod(f[2]));
                frac_ink.push_back(std::stod(f[3]));
                frac_papyrus.push_back(std::stod(f[4]));
                dice_mi.push_back(std::stod(f[5]));
            }
            nlohmann::json jm;
            jm["frac_total"] = summary_json(stats::summarize(frac_total));
            jm["frac_ink"] = summary_json(stats::summarize(frac_ink));
            jm["frac_papyrus"] = summary_json(stats::summarize(frac_papyrus));
            jm["dice_missing_vs_ink"] = summary_json(stats::summarize(dice_mi));
            try {
                jm["wilcoxon_ink_vs_papyrus"] =
                    report_json(stats::wilcoxon_signed_rank(frac_ink, frac_papyrus));
            } catch (const std::invalid_argument& e) {
                jm["wilcoxon_ink_vs_papyrus"] = {{"degenerate", true}, {"note", e.what()}};
            }
            j["missingness"] = std::move(jm);
        }
    }

    write_text(cfg.out / "stats_summary.csv", summary_csv);
    emit(cfg.out / "stats_summary.csv");
    write_text(cfg.out / "stats.json", j.dump(2) + "\n");
    emit(cfg.out / "stats.json");
}

void cmd_report(const RunConfig& cfg) {
    if (cfg.out.empty()) throw std::runtime_error("report: 'out' directory is required");
    echo_provenance(cfg, "report");

    auto matched_path = cfg.out / "results_matched.csv";
    auto cross_path = cfg.out / "results_cross_res.csv";
    if (!std::filesystem::exists(matched_path))
        throw std::runtime_error("report: missing " + matched_path.string() + " (run 'run' first)");
    RegimeData matched = organize(eval::read_results_csv(matched_path));
    RegimeData cross;
    if (std::filesystem::exists(cross_path)) cross = organize(eval::read_results_csv(cross_path));

    std::vector<report::BoxGroup> groups;
    for (double p : matched.pitches) {
        report::BoxGroup g;
        g.label = pitch_label(p);
        g.matched = matched.by_pitch.at(p);
        auto it = cross.by_pitch.find(p);
        if (it != cross.by_pitch.end()) g.cross_res = it->second;
        groups.push_back(std::move(g));
    }

    write_text(cfg.out / "report.svg", report::grouped_boxplot_svg(groups));
    emit(cfg.out / "report.svg");
    std::string md = "# Dice versus lateral pixel size\n\n" + report::summary_markdown(groups);
    write_text(cfg.out / "report.md", md);
    emit(cfg.out / "report.md");
}

}  // namespace reliefscan::cli
