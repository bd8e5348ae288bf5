#include "panelcast/app.hpp"

#include "panelcast/config.hpp"
#include "panelcast/csv.hpp"
#include "panelcast/errors.hpp"
#include "panelcast/eval_forecast.hpp"
#include "panelcast/gbtree.hpp"
#include "panelcast/pipeline.hpp"
#include "panelcast/svg.hpp"
#include "panelcast/tuning.hpp"

#include "CLI11.hpp"

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace panelcast::app {

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool no_svg = false;
};

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

class Runner {
public:
    Runner(PipelineConfig config, bool svg, std::ostream& out) : config_(std::move(config)), svg_(svg), out_(out) {}

    void rank() {
        const auto& sel = selections();
        for (const auto& s : sel) {
            std::ostringstream csv;
            write_ranking_csv(csv, s, config_.edr.k);
            write(fs::path("rankings") / (s.country + ".csv"), csv.str());
            write(fs::path("panels") / (s.country + ".json"), panel_to_json(s.panel).dump(1) + "\n");
            if (s.panel.has_no_features()) out_ << s.country << ": warning: panel has no features\n";
            out_ << s.country << ':';
            for (const auto& e : s.ranking.top(config_.edr.k).entries) out_ << ' ' << e.indicator_code << '(' << e.distance << ')';
            out_ << '\n';
        }
    }

    void tune() {
        const auto& sel = selections();
        const auto results = parallel_map(sel, [&](const CountrySelection& s) {
            const auto train = split_train_test(s.panel, config_.last_train_year).first;
            return grid_search(train, config_.grid, config_.cv, config_.seed);
        });
        for (std::size_t i = 0; i < sel.size(); ++i) {
            const auto& r = results[i];
            std::ostringstream csv;
            write_leaderboard_csv(csv, r);
            write(fs::path("tuning") / (sel[i].country + "_leaderboard.csv"), csv.str());
            const nlohmann::json best = {{"country", sel[i].country},
                                         {"best_params", to_json(r.best_params)},
                                         {"cv_mape", r.best_score},
                                         {"evaluated", r.leaderboard.size()},
                                         {"disqualified", r.disqualified.size()}};
            write(fs::path("tuning") / (sel[i].country + "_best_params.json"), best.dump(1) + "\n");
            out_ << fmt::format("{}: {} combinations, best CV MAPE {:.6f}%", sel[i].country, r.leaderboard.size(), r.best_score);
            if (!r.disqualified.empty()) out_ << fmt::format(" ({} disqualified)", r.disqualified.size());
            out_ << '\n';
        }
    }

    void train() {
        const auto& sel = selections();
        std::vector<HyperParams> params;
        for (const auto& s : sel) params.push_back(read_best_params(s.country));
        std::vector<std::size_t> idx(sel.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        const auto models = parallel_map(idx, [&](std::size_t i) {
            const auto train = split_train_test(sel[i].panel, config_.last_train_year).first;
            return std::make_pair(fit(train, params[i], config_.seed), fit(sel[i].panel, params[i], config_.seed));
        });
        for (std::size_t i = 0; i < sel.size(); ++i) {
            write(fs::path("models") / (sel[i].country + ".json"), serialize_model(models[i].first));
            write(fs::path("models") / (sel[i].country + "_full.json"), serialize_model(models[i].second));
            out_ << fmt::format("{}: trained {} trees\n", sel[i].country, models[i].first.trees.size());
        }
    }

    void evaluate() {
        const auto& sel = selections();
        const auto models = load_models("");
        std::vector<BacktestReport> reports;
        for (std::size_t i = 0; i < sel.size(); ++i) {
            const auto [train, test] = split_train_test(sel[i].panel, config_.last_train_year);
            reports.push_back(panelcast::evaluate(models[i], train, test));
        }
        std::ostringstream backtest_csv;
        std::ostringstream summary_csv;
        write_backtest_csv(backtest_csv, reports);
        write_summary_csv(summary_csv, reports);
        write("backtest.csv", backtest_csv.str());
        write("summary.csv", summary_csv.str());
        for (const auto& r : reports)
            out_ << fmt::format("{}: train MAPE {:.6f}%, test MAPE {:.6f}%\n", r.country, r.train_mape, r.test_mape);
        if (svg_) charts();
    }

    void forecast() {
        const auto& sel = selections();
        const auto models = load_models("_full");
        std::vector<ForecastResult> results;
        for (std::size_t i = 0; i < sel.size(); ++i)
            results.push_back(panelcast::forecast(models[i], sel[i].panel, config_.forecast.horizon, config_.forecast.trend_window));
        std::ostringstream csv;
        write_forecast_csv(csv, results);
        write("forecast.csv", csv.str());
        for (const auto& r : results) {
            out_ << r.country << ':';
            for (std::size_t i = 0; i < r.predictions.size(); ++i)
                out_ << fmt::format(" {}={:.4f}", r.horizon_years[i], r.predictions[i]);
            out_ << '\n';
        }
        if (svg_) charts();
    }

    void report() {
        const auto summary = out_dir() / "summary.csv";
        if (!fs::exists(summary)) throw DataError(fmt::format("{}: not found, run `evaluate` first", summary.string()));
        std::istringstream in(read_file(summary));
        std::string line;
        std::getline(in, line);
        out_ << fmt::format("{:<10} {:>16} {:>16}\n", "MAPE", "Train", "Test");
        while (std::getline(in, line)) {
            const auto f = csv::split_line(line);
            if (f.size() == 3) out_ << fmt::format("{:<10} {:>16} {:>16}\n", f[0], f[1], f[2]);
        }
        if (svg_) charts();
    }

    void write_manifest(const std::string& command) {
        nlohmann::json artifacts = nlohmann::json::object();
        std::vector<fs::path> files;
        if (fs::exists(out_dir()))
            for (const auto& e : fs::recursive_directory_iterator(out_dir()))
                if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto rel = fs::relative(f, out_dir()).generic_string();
            if (rel == "manifest.json" || rel.ends_with(".tmp")) continue;
            artifacts[rel] = hex64(fnv1a64(read_file(f)));
        }
        const nlohmann::json manifest = {
            {"tool", "panelcast"},
            {"version", kVersion},
            {"model_format_version", kModelFormatVersion},
            {"command", command},
            {"seed", config_.seed},
            {"config_hash", hex64(fnv1a64(canonical_json(config_).dump()))},
            {"inputs",
             {{"indicators", hex64(fnv1a64(read_file(config_.paths.indicators)))},
              {"target", hex64(fnv1a64(read_file(config_.paths.target)))}}},
            {"artifacts", artifacts}};
        write("manifest.json", manifest.dump(1) + "\n");
    }

private:
    const fs::path& out_dir() const { return config_.paths.output_dir; }

    void write(const fs::path& rel, const std::string& content) { write_file_atomic(out_dir() / rel, content); }

    const std::vector<CountrySelection>& selections() {
        if (!selections_) {
            const auto data = load_dataset(config_);
            selections_ = select_all(data, config_);
        }
        return *selections_;
    }

    HyperParams read_best_params(const std::string& country) const {
        const auto path = out_dir() / "tuning" / (country + "_best_params.json");
        if (!fs::exists(path)) throw DataError(fmt::format("{}: not found, run `tune` first", path.string()));
        try {
            return hyperparams_from_json(nlohmann::json::parse(read_file(path)).at("best_params"));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("{}: {}", path.string(), e.what()));
        } catch (const ParameterError& e) {
            throw DataError(fmt::format("{}: {}", path.string(), e.what()));
        }
    }

    // Loads every model before anything is written, so a bad file leaves the
    // output directory untouched.
    std::vector<BoostedModel> load_models(const std::string& suffix) {
        std::vector<BoostedModel> models;
        for (const auto& s : selections()) {
            const auto path = out_dir() / "models" / (s.country + suffix + ".json");
            if (!fs::exists(path)) throw DataError(fmt::format("{}: not found, run `train` first", path.string()));
            try {
                models.push_back(deserialize_model(read_file(path)));
            } catch (const ModelFormatError& e) {
                throw ModelFormatError(fmt::format("{}: {}", path.string(), e.what()));
            }
            if (models.back().feature_codes != s.panel.feature_codes)
                throw ModelFormatError(fmt::format("{}: feature codes do not match the current panel", path.string()));
        }
        return models;
    }

    // Actual vs predicted per country from whichever of backtest.csv and
    // forecast.csv exist.
    void charts() {
        std::map<std::string, std::vector<ChartSeries>> by_country;
        auto series_for = [&](const std::string& country) -> std::vector<ChartSeries>& {
            auto& v = by_country[country];
            if (v.empty()) {
                v.push_back({"actual", "#1f77b4", {}, {}, false});
                v.push_back({"predicted", "#d62728", {}, {}, false});
                v.push_back({"forecast", "#2ca02c", {}, {}, true});
            }
            return v;
        };
        if (const auto p = out_dir() / "backtest.csv"; fs::exists(p)) {
            std::istringstream in(read_file(p));
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                const auto f = csv::split_line(line);
                if (f.size() != 5) continue;
                auto& s = series_for(f[0]);
                const int year = static_cast<int>(csv::parse_integer(f[2]).value_or(0));
                s[0].years.push_back(year);
                s[0].values.push_back(csv::parse_number(f[3]).value_or(kMissing));
                s[1].years.push_back(year);
                s[1].values.push_back(csv::parse_number(f[4]).value_or(kMissing));
            }
        }
        if (const auto p = out_dir() / "forecast.csv"; fs::exists(p)) {
            std::istringstream in(read_file(p));
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                const auto f = csv::split_line(line);
                if (f.size() != 4) continue;
                auto& s = series_for(f[0]);
                s[2].years.push_back(static_cast<int>(csv::parse_integer(f[1]).value_or(0)));
                s[2].values.push_back(csv::parse_number(f[2]).value_or(kMissing));
            }
        }
        for (auto& [country, series] : by_country) {
            std::erase_if(series, [](const ChartSeries& s) { return s.years.empty(); });
            write(fs::path("charts") / (country + ".svg"),
                  render_line_chart(country + ": actual vs predicted safety and security index", series));
        }
    }

    PipelineConfig config_;
    bool svg_;
    std::ostream& out_;
    std::optional<std::vector<CountrySelection>> selections_;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App cli{"Panel forecasting: EDR feature ranking, boosted trees, MAPE backtests, 5-year forecasts", "panelcast"};
    cli.set_version_flag("--version", kVersion);
    cli.require_subcommand(1, 1);
    cli.fallthrough();

    Options opt;
    cli.add_option("--config", opt.config_path, "Pipeline config file (JSON)")->required();
    cli.add_option("--seed", opt.seed, "Override the config seed");
    cli.add_option("--out", opt.out_dir, "Override the output directory");
    cli.add_flag("--no-svg", opt.no_svg, "Skip SVG charts");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"rank", "Rank indicators by EDR distance to the target and write per-country rankings"},
        {"tune", "Grid search with cross-validation on the training years"},
        {"train", "Fit backtest and full-range models with the tuned parameters"},
        {"evaluate", "Score trained models on the train/test split (summary and backtest CSVs)"},
        {"forecast", "Extrapolate predictors and forecast the target beyond the panel"},
        {"report", "Print the MAPE summary and render charts"},
        {"all", "Run every stage in order"},
    };
    for (const auto& [name, help] : commands) cli.add_subcommand(name, help);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        cli.parse(reversed);
    } catch (const CLI::Success& e) {
        return cli.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        cli.exit(e, out, err);
        return kConfigError;
    }
    const std::string command = cli.get_subcommands().front()->get_name();

    try {
        auto config = load_config(opt.config_path);
        if (opt.seed) config.seed = *opt.seed;
        if (opt.out_dir) config.paths.output_dir = *opt.out_dir;
        Runner runner(std::move(config), !opt.no_svg, out);

        if (command == "rank") runner.rank();
        else if (command == "tune") runner.tune();
        else if (command == "train") runner.train();
        else if (command == "evaluate") runner.evaluate();
        else if (command == "forecast") runner.forecast();
        else if (command == "report") runner.report();
        else {
            runner.rank();
            runner.tune();
            runner.train();
            runner.evaluate();
            runner.forecast();
            runner.report();
        }
        runner.write_manifest(command);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const ModelFormatError& e) {
        err << "model error: " << e.what() << '\n';
        return kRuntimeError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}

} // namespace panelcast::app
