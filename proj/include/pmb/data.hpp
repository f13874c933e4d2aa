#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pmb/perceptron.hpp"
#include "pmb/random.hpp"

namespace pmb {

struct GeneratorSpec {
    enum class Kind { SeparableMargin, LabelNoise, Contradictory };

    Kind kind = Kind::SeparableMargin;
    std::size_t dim = 2;
    std::size_t count = 100;
    double radius = 1.0;
    double margin = 0.1;     // planted rho*, SeparableMargin and LabelNoise
    double flip_prob = 0.0;  // LabelNoise
    std::uint64_t seed = 0;

    void validate() const;
};

/// Parses `kind:key=value,...`, kind in {sep, noise, contradictory}, keys
/// N, T, r, rho, p, seed. Unspecified keys keep their defaults.
GeneratorSpec parse_generator_spec(std::string_view text);
std::string to_string(const GeneratorSpec& spec);

struct GeneratedData {
    Stream stream;
    std::optional<Vector> planted;  // v*, unit norm
};

/// The data distribution a spec describes: the planted separator is fixed by
/// spec.seed; `sample` draws i.i.d. examples with a caller-owned generator.
class ExampleDistribution {
public:
    explicit ExampleDistribution(const GeneratorSpec& spec);

    const GeneratorSpec& spec() const noexcept { return spec_; }
    const std::optional<Vector>& planted() const noexcept { return planted_; }

    Stream sample(std::size_t count, Rng& rng) const;

    /// Abort threshold for consecutive rejections.
    static constexpr std::size_t kMaxRejections = 1'000'000;

private:
    LabeledExample draw_separable(Rng& rng) const;

    GeneratorSpec spec_;
    std::optional<Vector> planted_;
};

GeneratedData generate(const GeneratorSpec& spec);

enum class FileFormat { CSV, SparseIndexValue };

std::optional<FileFormat> parse_file_format(std::string_view s);

/// Parses text in the given format. Errors carry 1-based line numbers.
Stream parse_stream(std::string_view text, FileFormat format);
std::string format_stream(std::span<const LabeledExample> stream, FileFormat format);

Stream load(const std::filesystem::path& path, FileFormat format);
void save(std::span<const LabeledExample> stream, const std::filesystem::path& path, FileFormat format);

/// 64-bit FNV-1a of the CSV serialization.
std::uint64_t stream_digest(std::span<const LabeledExample> stream);

}  // namespace pmb
