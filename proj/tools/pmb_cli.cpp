// pmb: generate or load a stream, run the Perceptron, certify mistake bounds
// and run online-to-batch coverage experiments.
//
// Exit codes: 0 ok, 1 invalid bound or runtime failure, 2 usage,
// 3 infeasible witness, 4 parse error.

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmb/bounds.hpp"
#include "pmb/data.hpp"
#include "pmb/online_to_batch.hpp"
#include "pmb/perceptron.hpp"

using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kInfeasible = 3, kParse = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string data, gen, format = "csv", kernel, rule = "nonpositive";
    double eta = 1.0;
    bool json = false, csv = false;

    std::string loss = "hinge", bound = "all", rho_grid, witness;
    std::size_t iters = 200;
    std::uint64_t seed = 0;

    double delta = 0.1;
    std::size_t trials = 200, test_size = 5000;
};

struct Dataset {
    pmb::Stream stream;
    std::optional<pmb::GeneratorSpec> spec;
    std::optional<pmb::Vector> planted;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) throw UsageError("bad number for " + what + ": '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto k = s.find(sep);
        out.push_back(s.substr(0, k));
        if (k == std::string_view::npos) return out;
        s.remove_prefix(k + 1);
    }
}

std::optional<pmb::KernelSpec> parse_kernel(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::map<std::string, double> kv;
    if (colon != std::string::npos)
        for (auto item : split(std::string_view(text).substr(colon + 1), ',')) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw UsageError("kernel: expected key=value, got '" + std::string(item) + "'");
            kv[std::string(item.substr(0, eq))] = parse_double(item.substr(eq + 1), "kernel " + std::string(item.substr(0, eq)));
        }
    const auto get = [&](const char* key, double fallback) {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    pmb::KernelSpec k;
    if (kind == "linear")
        k = pmb::KernelSpec::linear();
    else if (kind == "poly" || kind == "polynomial")
        k = pmb::KernelSpec::polynomial(get("c", 1.0), static_cast<int>(get("d", 2.0)));
    else if (kind == "rbf")
        k = pmb::KernelSpec::rbf(get("sigma", 1.0));
    else
        throw UsageError("unknown kernel '" + kind + "'");
    k.validate();
    return k;
}

struct Witness {
    pmb::Vector u;
    double rho = 0.0;
};

// "u=a;b;c,rho=x", given inline or as the path of a file holding that text.
Witness parse_witness(std::string text) {
    if (std::ifstream f{text}; f) {
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    Witness w;
    bool have_u = false, have_rho = false;
    for (auto item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw UsageError("witness: expected key=value, got '" + std::string(item) + "'");
        const auto key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "u") {
            for (auto c : split(val, ';')) w.u.push_back(parse_double(c, "witness u"));
            have_u = true;
        } else if (key == "rho") {
            w.rho = parse_double(val, "witness rho");
            have_rho = true;
        } else {
            throw UsageError("witness: unknown key '" + std::string(key) + "'");
        }
    }
    if (!have_u || !have_rho) throw UsageError("witness needs both u= and rho=");
    return w;
}

pmb::UpdateRule parse_rule(const std::string& s) {
    if (s == "nonpositive") return pmb::UpdateRule::NonPositiveScore;
    if (s == "strict") return pmb::UpdateRule::StrictSignMismatch;
    throw UsageError("unknown update rule '" + s + "'");
}

Dataset load_dataset(const Options& o) {
    if (o.data.empty() == o.gen.empty()) throw UsageError("exactly one of --data and --gen is required");
    Dataset d;
    if (!o.gen.empty()) {
        try {
            d.spec = pmb::parse_generator_spec(o.gen);
        } catch (const pmb::ParameterError& e) {
            throw UsageError(e.what());
        }
        auto g = pmb::generate(*d.spec);
        d.stream = std::move(g.stream);
        d.planted = std::move(g.planted);
    } else {
        const auto fmt = pmb::parse_file_format(o.format);
        if (!fmt) throw UsageError("unknown format '" + o.format + "'");
        d.stream = pmb::load(o.data, *fmt);
        if (d.stream.empty()) throw pmb::ParseError(1, "no examples in " + o.data);
    }
    return d;
}

ordered_json base_document(const std::string& command, const Options& o, const Dataset& d) {
    ordered_json cfg;
    cfg["source"] = d.spec ? "gen:" + pmb::to_string(*d.spec) : "data:" + o.data;
    if (!o.kernel.empty()) cfg["kernel"] = o.kernel;
    cfg["eta"] = o.eta;
    cfg["rule"] = o.rule;
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["timestamp"] = utc_timestamp();
    doc["metadata"] = {{"seed", o.seed}, {"config", cfg}, {"dataset_digest", hex64(pmb::stream_digest(d.stream))}};
    return doc;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& rounds) {
    std::vector<std::size_t> out(rounds);
    for (auto& r : out) ++r;
    return out;
}

ordered_json trace_summary(const pmb::RunTrace& t) {
    return {{"T", t.rounds()},
            {"M_T", t.mistake_count},
            {"I", one_based(t.update_rounds)},
            {"radius", t.radius},
            {"sq_norm_sum", t.sq_norm_sum_I},
            {"final_weights", t.final_weights}};
}

ordered_json trace_summary(const pmb::KernelRunTrace& t) {
    return {{"T", t.rounds()},
            {"M_T", t.mistake_count},
            {"I", one_based(t.update_rounds)},
            {"radius", t.radius},
            {"kernel_trace", t.kernel_trace}};
}

ordered_json bound_json(const pmb::BoundReport& r) {
    return {{"name", std::string(pmb::to_string(r.name))},
            {"value", r.value},
            {"mistake_count", r.mistake_count},
            {"valid", r.valid},
            {"rho", r.witness_scale},
            {r.kernelized ? "beta" : "u", r.witness_u}};
}

void print_trace_table(std::ostream& os, const ordered_json& tr) {
    os << "T        " << tr["T"].get<std::size_t>() << "\n";
    os << "M_T      " << tr["M_T"].get<std::size_t>() << "\n";
    os << "I        ";
    for (const auto& i : tr["I"]) os << i.get<std::size_t>() << ' ';
    os << "\nradius   " << num(tr["radius"].get<double>()) << "\n";
    if (tr.contains("kernel_trace"))
        os << "K trace  " << num(tr["kernel_trace"].get<double>()) << "\n";
    else
        os << "sum|x|^2 " << num(tr["sq_norm_sum"].get<double>()) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_run(const Options& o) {
    const Dataset d = load_dataset(o);
    const auto kernel = parse_kernel(o.kernel);
    ordered_json doc = base_document("run", o, d);
    std::vector<std::pair<std::size_t, bool>> rounds;
    if (kernel) {
        if (o.eta != 1.0 || o.rule != "nonpositive") throw UsageError("--eta and --rule apply to primal runs only");
        const auto t = pmb::run_kernel(d.stream, *kernel);
        doc["trace"] = trace_summary(t);
        for (std::size_t k = 0; k < t.rounds(); ++k) rounds.emplace_back(k + 1, t.per_round[k].updated);
    } else {
        pmb::PerceptronConfig cfg;
        cfg.eta = o.eta;
        cfg.update_rule = parse_rule(o.rule);
        const auto t = pmb::run_primal(d.stream, cfg);
        doc["trace"] = trace_summary(t);
        for (std::size_t k = 0; k < t.rounds(); ++k) rounds.emplace_back(k + 1, t.per_round[k].updated);
    }
    if (o.json) {
        std::cout << doc.dump(2) << "\n";
    } else if (o.csv) {
        std::cout << "round,updated\n";
        for (auto [r, u] : rounds) std::cout << r << ',' << (u ? 1 : 0) << "\n";
    } else {
        print_trace_table(std::cout, doc["trace"]);
    }
    return kOk;
}

std::vector<pmb::BoundName> requested_bounds(const std::string& s) {
    if (s == "all") return {std::begin(pmb::kAllBounds), std::end(pmb::kAllBounds)};
    const auto b = pmb::parse_bound_name(s);
    if (!b) throw UsageError("unknown bound '" + s + "'");
    return {*b};
}

int cmd_bounds(const Options& o) {
    const Dataset d = load_dataset(o);
    const auto kernel = parse_kernel(o.kernel);
    const auto family = pmb::parse_loss_family(o.loss);
    if (!family) throw UsageError("unknown loss '" + o.loss + "'");
    const auto names = requested_bounds(o.bound);
    const bool all = o.bound == "all";

    pmb::OptimizerOptions opt;
    opt.iters = o.iters;
    opt.seed = o.seed;
    if (!o.rho_grid.empty())
        for (auto v : split(o.rho_grid, ',')) opt.rho_grid.push_back(parse_double(v, "--rho-grid"));
    std::optional<Witness> witness;
    if (!o.witness.empty()) witness = parse_witness(o.witness);

    pmb::PerceptronConfig cfg;
    cfg.eta = o.eta;
    cfg.update_rule = parse_rule(o.rule);

    ordered_json doc = base_document("bounds", o, d);
    doc["metadata"]["config"]["loss"] = o.loss;
    doc["metadata"]["config"]["bound"] = o.bound;
    std::vector<pmb::BoundReport> reports;
    std::vector<std::pair<std::string, std::string>> skipped;

    // Novikoff under `all` is reported only when some separator is found.
    const auto attempt = [&](pmb::BoundName name, auto&& fn) {
        try {
            reports.push_back(fn());
        } catch (const pmb::InfeasibleWitness& e) {
            if (!(all && name == pmb::BoundName::Novikoff)) throw;
            skipped.emplace_back(std::string(pmb::to_string(name)), e.what());
        }
    };

    if (kernel) {
        if (o.eta != 1.0 || o.rule != "nonpositive") throw UsageError("--eta and --rule apply to primal runs only");
        const auto t = pmb::run_kernel(d.stream, *kernel);
        doc["trace"] = trace_summary(t);
        for (auto name : names)
            attempt(name, [&] {
                return witness ? pmb::evaluate_kernel_bound(name, t, d.stream, *family, witness->rho, witness->u)
                               : pmb::optimize_kernel_bound(t, d.stream, name, *family, opt);
            });
    } else {
        const auto t = pmb::run_primal(d.stream, cfg);
        doc["trace"] = trace_summary(t);
        const bool planted_margin = d.spec && d.spec->kind == pmb::GeneratorSpec::Kind::SeparableMargin;
        for (auto name : names)
            attempt(name, [&] {
                if (witness) {
                    if (name == pmb::BoundName::Novikoff) return pmb::novikoff_bound(t, d.stream, witness->u, witness->rho);
                    return pmb::evaluate_bound(name, t, d.stream, *family, witness->rho, witness->u);
                }
                if (name == pmb::BoundName::Novikoff && planted_margin)
                    return pmb::novikoff_bound(t, d.stream, *d.planted, d.spec->margin);
                return pmb::optimize_bound(t, d.stream, name, *family, opt);
            });
    }

    bool all_valid = true;
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        arr.push_back(bound_json(r));
        all_valid = all_valid && r.valid;
    }
    doc["bounds"] = arr;
    ordered_json sk = ordered_json::array();
    for (const auto& [n, why] : skipped) sk.push_back({{"name", n}, {"reason", why}});
    doc["skipped"] = sk;

    if (o.json) {
        std::cout << doc.dump(2) << "\n";
    } else if (o.csv) {
        std::cout << "bound,value,mistakes,valid,rho\n";
        for (const auto& r : reports)
            std::cout << pmb::to_string(r.name) << ',' << num(r.value) << ',' << r.mistake_count << ','
                      << (r.valid ? 1 : 0) << ',' << num(r.witness_scale) << "\n";
    } else {
        print_trace_table(std::cout, doc["trace"]);
        std::cout << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-20s %14s %6s %6s %12s\n", "bound", "value", "M_T", "valid", "rho");
        std::cout << line;
        for (const auto& r : reports) {
            std::snprintf(line, sizeof line, "%-20s %14.6f %6zu %6s %12.6g\n", std::string(pmb::to_string(r.name)).c_str(),
                          r.value, r.mistake_count, r.valid ? "yes" : "NO", r.witness_scale);
            std::cout << line;
        }
        for (const auto& [n, why] : skipped) std::cout << n << " skipped: " << why << "\n";
    }
    if (!all_valid) std::cerr << "pmb: at least one bound is below M_T\n";
    return all_valid ? kOk : kInvalid;
}

int cmd_o2b(const Options& o) {
    if (!(o.delta > 0.0 && o.delta < 1.0)) throw UsageError("--delta must be in (0, 1)");
    if (o.gen.empty() || !o.data.empty()) throw UsageError("o2b needs --gen (it samples fresh data per trial)");
    const Dataset d = load_dataset(o);
    const auto res = pmb::coverage_experiment(*d.spec, d.spec->count, o.delta, o.trials, o.test_size, o.seed);

    ordered_json doc = base_document("o2b", o, d);
    doc["metadata"]["config"]["delta"] = o.delta;
    doc["metadata"]["config"]["trials"] = o.trials;
    doc["metadata"]["config"]["test_size"] = o.test_size;
    ordered_json trials = ordered_json::array();
    for (const auto& t : res.trials)
        trials.push_back({{"rhs", t.rhs},
                          {"test_error", t.test_error},
                          {"chosen_round", t.chosen_index + 1},
                          {"mistakes", t.mistakes},
                          {"violated", t.violated}});
    doc["coverage"] = {{"rounds", d.spec->count},
                       {"violation_fraction", res.violation_fraction},
                       {"violations", res.violations},
                       {"trials", trials}};

    if (o.json) {
        std::cout << doc.dump(2) << "\n";
    } else if (o.csv) {
        std::cout << "trial,rhs,test_error,chosen_round,mistakes,violated\n";
        for (std::size_t k = 0; k < res.trials.size(); ++k) {
            const auto& t = res.trials[k];
            std::cout << k + 1 << ',' << num(t.rhs) << ',' << num(t.test_error) << ',' << t.chosen_index + 1 << ','
                      << t.mistakes << ',' << (t.violated ? 1 : 0) << "\n";
        }
    } else {
        std::cout << "generator          " << pmb::to_string(*d.spec) << "\n"
                  << "delta              " << num(o.delta) << "\n"
                  << "trials             " << res.trials.size() << "\n"
                  << "violations         " << res.violations << "\n"
                  << "violation fraction " << num(res.violation_fraction) << "\n";
    }
    return kOk;
}

void add_input_flags(CLI::App* sub, Options& o) {
    sub->add_option("--data", o.data, "Dataset file");
    sub->add_option("--gen", o.gen, "Generator spec, e.g. sep:N=2,T=50,r=1,rho=0.2,seed=7");
    sub->add_option("--format", o.format, "csv | sparse")->capture_default_str();
    sub->add_option("--kernel", o.kernel, "linear | poly:c=1,d=2 | rbf:sigma=1");
    sub->add_option("--eta", o.eta, "Step size")->capture_default_str();
    sub->add_option("--rule", o.rule, "nonpositive | strict")->capture_default_str();
    sub->add_option("--seed", o.seed, "Optimizer / experiment seed")->capture_default_str();
    sub->add_flag("--json", o.json, "Emit the JSON report");
    sub->add_flag("--csv", o.csv, "Emit a flat CSV table");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perceptron mistake bounds toolkit"};
    app.set_config("--config", "", "Read flags from a TOML/INI file");
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Run the Perceptron and print the trace summary");
    add_input_flags(run, o);

    auto* bounds = app.add_subcommand("bounds", "Certify mistake bounds");
    add_input_flags(bounds, o);
    bounds->add_option("--loss", o.loss, "hinge | sqhinge | huber")->capture_default_str();
    bounds->add_option("--bound", o.bound, "Bound name or all")->capture_default_str();
    bounds->add_option("--rho-grid", o.rho_grid, "Comma-separated rho values");
    bounds->add_option("--iters", o.iters, "Subgradient iterations per rho")->capture_default_str();
    bounds->add_option("--witness", o.witness, "u=a;b,rho=x or a file containing it");

    auto* o2b = app.add_subcommand("o2b", "Online-to-batch coverage experiment");
    add_input_flags(o2b, o);
    o2b->add_option("--delta", o.delta, "Confidence parameter")->capture_default_str();
    o2b->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
    o2b->add_option("--test-size", o.test_size, "Test examples per trial")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    if (o.json && o.csv) {
        std::cerr << "pmb: --json and --csv are exclusive\n";
        return kUsage;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (bounds->parsed()) return cmd_bounds(o);
        return cmd_o2b(o);
    } catch (const UsageError& e) {
        std::cerr << "pmb: " << e.what() << "\n";
        return kUsage;
    } catch (const pmb::ParseError& e) {
        std::cerr << "pmb: parse error: " << e.what() << "\n";
        return kParse;
    } catch (const pmb::InfeasibleWitness& e) {
        std::cerr << "pmb: infeasible witness: " << e.what() << "\n";
        return kInfeasible;
    } catch (const pmb::ParameterError& e) {
        std::cerr << "pmb: " << e.what() << "\n";
        return kUsage;
    } catch (const pmb::InvalidInput& e) {
        std::cerr << "pmb: invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const pmb::PreconditionError& e) {
        std::cerr << "pmb: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "pmb: " << e.what() << "\n";
        return kInvalid;
    }
}
