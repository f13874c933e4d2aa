#include "pmb/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace pmb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kSampleStream = 1;

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

int parse_label(std::string_view tok, std::size_t line) {
    long v = 0;
    if (!parse_number(trim(tok), v)) throw ParseError(line, "malformed label '" + std::string(tok) + "'");
    if (v == 1) return 1;
    if (v == -1 || v == 0) return -1;
    throw ParseError(line, "label must be one of -1, +1, 0, 1 (got " + std::string(tok) + ")");
}

double parse_feature(std::string_view tok, std::size_t line) {
    double v = 0.0;
    if (!parse_number(trim(tok), v)) throw ParseError(line, "malformed value '" + std::string(tok) + "'");
    if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
    return v;
}

void append_double(std::string& out, double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line = 0;
    while (!text.empty()) {
        ++line;
        const auto nl = text.find('\n');
        std::string_view row = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        row = trim(row);
        if (row.empty() || row.front() == '#') continue;
        fn(row, line);
    }
}

Stream parse_csv(std::string_view text) {
    Stream out;
    std::size_t dim = 0;
    for_each_line(text, [&](std::string_view row, std::size_t line) {
        LabeledExample ex;
        std::size_t field = 0;
        while (true) {
            const auto comma = row.find(',');
            const auto tok = row.substr(0, comma);
            if (field++ == 0)
                ex.label = parse_label(tok, line);
            else
                ex.features.push_back(parse_feature(tok, line));
            if (comma == std::string_view::npos) break;
            row.remove_prefix(comma + 1);
        }
        if (ex.features.empty()) throw ParseError(line, "row has no features");
        if (out.empty())
            dim = ex.features.size();
        else if (ex.features.size() != dim)
            throw ParseError(line, "expected " + std::to_string(dim) + " features, got " +
                                       std::to_string(ex.features.size()));
        out.push_back(std::move(ex));
    });
    return out;
}

Stream parse_sparse(std::string_view text) {
    struct Row {
        int label;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<Row> rows;
    std::size_t dim = 0;
    for_each_line(text, [&](std::string_view row, std::size_t line) {
        std::istringstream in{std::string(row)};
        std::string tok;
        in >> tok;
        Row r{parse_label(tok, line), {}};
        std::size_t last = 0;
        while (in >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError(line, "expected idx:val, got '" + tok + "'");
            std::size_t idx = 0;
            if (!parse_number(std::string_view(tok).substr(0, colon), idx) || idx == 0)
                throw ParseError(line, "bad index in '" + tok + "' (indices are 1-based)");
            if (idx <= last) throw ParseError(line, "indices must be strictly ascending");
            last = idx;
            r.entries.emplace_back(idx, parse_feature(std::string_view(tok).substr(colon + 1), line));
        }
        dim = std::max(dim, last);
        rows.push_back(std::move(r));
    });
    if (!rows.empty() && dim == 0) throw ParseError(1, "no feature indices in file");
    Stream out;
    out.reserve(rows.size());
    for (auto& r : rows) {
        LabeledExample ex{Vector(dim, 0.0), r.label};
        for (auto [i, v] : r.entries) ex.features[i - 1] = v;
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace

void GeneratorSpec::validate() const {
    if (dim < 1) throw ParameterError("generator: N must be >= 1");
    if (count < 1) throw ParameterError("generator: T must be >= 1");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ParameterError("generator: r must be > 0");
    if (kind == Kind::Contradictory) return;
    if (!(margin > 0.0)) throw ParameterError("generator: rho must be > 0");
    if (!(margin < radius))
        throw ParameterError("generator: infeasible margin, rho (" + std::to_string(margin) + ") must be < r (" +
                             std::to_string(radius) + ")");
    if (kind == Kind::LabelNoise && !(flip_prob >= 0.0 && flip_prob < 1.0))
        throw ParameterError("generator: p must be in [0, 1)");
}

GeneratorSpec parse_generator_spec(std::string_view text) {
    GeneratorSpec spec;
    const auto colon = text.find(':');
    const std::string_view kind = trim(text.substr(0, colon));
    if (kind == "sep" || kind == "separable")
        spec.kind = GeneratorSpec::Kind::SeparableMargin;
    else if (kind == "noise")
        spec.kind = GeneratorSpec::Kind::LabelNoise;
    else if (kind == "contradictory")
        spec.kind = GeneratorSpec::Kind::Contradictory;
    else
        throw ParameterError("generator: unknown kind '" + std::string(kind) + "'");

    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    while (!trim(rest).empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ParameterError("generator: expected key=value, got '" + std::string(item) + "'");
        const auto key = trim(item.substr(0, eq));
        const auto val = trim(item.substr(eq + 1));
        bool ok = false;
        if (key == "N")
            ok = parse_number(val, spec.dim);
        else if (key == "T")
            ok = parse_number(val, spec.count);
        else if (key == "r")
            ok = parse_number(val, spec.radius);
        else if (key == "rho")
            ok = parse_number(val, spec.margin);
        else if (key == "p")
            ok = parse_number(val, spec.flip_prob);
        else if (key == "seed")
            ok = parse_number(val, spec.seed);
        else
            throw ParameterError("generator: unknown key '" + std::string(key) + "'");
        if (!ok) throw ParameterError("generator: bad value for " + std::string(key));
    }
    spec.validate();
    return spec;
}

std::string to_string(const GeneratorSpec& spec) {
    std::string s;
    switch (spec.kind) {
        case GeneratorSpec::Kind::SeparableMargin:
            s = "sep";
            break;
        case GeneratorSpec::Kind::LabelNoise:
            s = "noise";
            break;
        case GeneratorSpec::Kind::Contradictory:
            s = "contradictory";
            break;
    }
    s += ":N=" + std::to_string(spec.dim) + ",T=" + std::to_string(spec.count) + ",r=";
    append_double(s, spec.radius);
    if (spec.kind != GeneratorSpec::Kind::Contradictory) {
        s += ",rho=";
        append_double(s, spec.margin);
    }
    if (spec.kind == GeneratorSpec::Kind::LabelNoise) {
        s += ",p=";
        append_double(s, spec.flip_prob);
    }
    s += ",seed=" + std::to_string(spec.seed);
    return s;
}

// ---------------------------------------------------------------------------

ExampleDistribution::ExampleDistribution(const GeneratorSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.kind != GeneratorSpec::Kind::Contradictory) {
        Rng rng(spec_.seed);
        planted_ = rng.unit_sphere(spec_.dim);
    }
}

LabeledExample ExampleDistribution::draw_separable(Rng& rng) const {
    const auto& v = *planted_;
    const double inv_dim = 1.0 / static_cast<double>(spec_.dim);
    for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        Vector x = rng.unit_sphere(spec_.dim);
        const double rad = spec_.radius * std::pow(rng.uniform(), inv_dim);
        for (double& c : x) c *= rad;
        if (norm(x) > spec_.radius) continue;
        const double s = dot(v, x);
        if (std::abs(s) >= spec_.margin) return {std::move(x), s > 0.0 ? 1 : -1};
    }
    throw ParameterError("generator: " + std::to_string(kMaxRejections) +
                         " consecutive rejections; rho is too close to r");
}

Stream ExampleDistribution::sample(std::size_t count, Rng& rng) const {
    Stream out;
    out.reserve(count);
    if (spec_.kind == GeneratorSpec::Kind::Contradictory) {
        for (std::size_t t = 0; t < count; ++t) {
            Vector x(spec_.dim, 0.0);
            x[0] = spec_.radius;
            out.push_back({std::move(x), t % 2 == 0 ? 1 : -1});
        }
        return out;
    }
    for (std::size_t t = 0; t < count; ++t) {
        LabeledExample ex = draw_separable(rng);
        // The flip draw is consumed for both kinds so that p = 0 reproduces
        // the separable stream exactly.
        const double u = rng.uniform();
        if (spec_.kind == GeneratorSpec::Kind::LabelNoise && u < spec_.flip_prob) ex.label = -ex.label;
        out.push_back(std::move(ex));
    }
    return out;
}

GeneratedData generate(const GeneratorSpec& spec) {
    ExampleDistribution dist(spec);
    Rng rng(splitmix64(spec.seed ^ kSampleStream));
    return {dist.sample(spec.count, rng), dist.planted()};
}

// ---------------------------------------------------------------------------

std::optional<FileFormat> parse_file_format(std::string_view s) {
    if (s == "csv") return FileFormat::CSV;
    if (s == "sparse" || s == "svm" || s == "libsvm") return FileFormat::SparseIndexValue;
    return std::nullopt;
}

Stream parse_stream(std::string_view text, FileFormat format) {
    return format == FileFormat::CSV ? parse_csv(text) : parse_sparse(text);
}

std::string format_stream(std::span<const LabeledExample> stream, FileFormat format) {
    std::string out;
    for (const auto& ex : stream) {
        out += ex.label > 0 ? "+1" : "-1";
        const std::size_t n = ex.features.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (format == FileFormat::CSV) {
                out += ',';
            } else {
                // The last coordinate is always written so the dimension survives.
                if (ex.features[i] == 0.0 && i + 1 != n) continue;
                out += ' ';
                out += std::to_string(i + 1);
                out += ':';
            }
            append_double(out, ex.features[i]);
        }
        out += '\n';
    }
    return out;
}

Stream load(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_stream(buf.str(), format);
}

void save(std::span<const LabeledExample> stream, const std::filesystem::path& path, FileFormat format) {
    validate_stream(stream);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << format_stream(stream, format);
    if (!out) throw IoError("write failed for " + path.string());
}

std::uint64_t stream_digest(std::span<const LabeledExample> stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : format_stream(stream, FileFormat::CSV)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace pmb
