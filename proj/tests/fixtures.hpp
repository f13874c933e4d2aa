#pragma once

// Worked datasets and an independent reference Perceptron used as the
// oracle for trace tests.

#include <cmath>
#include <vector>

#include "pmb/perceptron.hpp"
#include "pmb/random.hpp"

namespace fixtures {

using pmb::LabeledExample;
using pmb::Stream;

// (+2,+1), (-2,-1), (+2,+1), (-2,-1)
inline Stream separable_1d() { return {{{2.0}, 1}, {{-2.0}, -1}, {{2.0}, 1}, {{-2.0}, -1}}; }

// ((1,0),+1), ((0,1),+1), ((-1,0),-1)
inline Stream two_d() { return {{{1.0, 0.0}, 1}, {{0.0, 1.0}, 1}, {{-1.0, 0.0}, -1}}; }

// [(1,+1),(1,-1)] x 2
inline Stream contradictory_1d() { return {{{1.0}, 1}, {{1.0}, -1}, {{1.0}, 1}, {{1.0}, -1}}; }

struct ReferenceRun {
    std::vector<std::size_t> updates;
    std::vector<double> final_w;
};

// Straight transcription of the textbook loop: w0 = 0, eta = 1, update when
// y (w . x) <= 0.
inline ReferenceRun reference_perceptron(const Stream& s) {
    ReferenceRun r;
    r.final_w.assign(s.front().features.size(), 0.0);
    for (std::size_t t = 0; t < s.size(); ++t) {
        double score = 0.0;
        for (std::size_t i = 0; i < r.final_w.size(); ++i) score += r.final_w[i] * s[t].features[i];
        if (s[t].label * score <= 0.0) {
            r.updates.push_back(t);
            for (std::size_t i = 0; i < r.final_w.size(); ++i) r.final_w[i] += s[t].label * s[t].features[i];
        }
    }
    return r;
}

// Random stream with Gaussian features and a noisy linear labeling; the
// kind selector mixes separable-ish, noisy and repeated-point streams.
inline Stream random_stream(pmb::Rng& rng, std::size_t n, std::size_t t, int kind) {
    Stream s;
    pmb::Vector v = rng.unit_sphere(n);
    const double scale = 0.1 + 10.0 * rng.uniform();
    for (std::size_t k = 0; k < t; ++k) {
        pmb::Vector x(n);
        for (double& c : x) c = scale * rng.normal();
        if (kind == 2 && k > 0 && rng.uniform() < 0.5) x = s[k - 1].features;
        int y = pmb::dot(v, x) >= 0.0 ? 1 : -1;
        if (kind >= 1 && rng.uniform() < 0.2) y = -y;
        s.push_back({std::move(x), y});
    }
    return s;
}

}  // namespace fixtures
