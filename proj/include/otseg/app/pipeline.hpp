#pragma once

// Glue shared by the command-line tool and the HTTP service: run configuration,
// quantization, scribble-driven segmentation and the raster outputs.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "otseg/error.hpp"
#include "otseg/features/assignment.hpp"
#include "otseg/features/extract.hpp"
#include "otseg/features/kmeans.hpp"
#include "otseg/features/scribbles.hpp"
#include "otseg/io/png.hpp"
#include "otseg/ot/cost.hpp"
#include "otseg/seg/segment.hpp"

namespace otseg::app {

/// Solving needs at least two scribbled labels.
class InsufficientLabels : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct RunOptions {
    SegConfig seg;
    FeatureKind features = FeatureKind::rgb;
    std::size_t bins = 0;  ///< 0 picks 8^dim
    std::uint64_t seed = 0;
};

inline const std::set<std::string>& run_option_keys() {
    static const std::set<std::string> keys{"variant",  "rho",       "lambda",        "threshold",
                                            "tol",      "max_iter",  "precond_r",     "precond_delta",
                                            "precond_gamma", "features", "bins",      "seed"};
    return keys;
}

/// Rejects keys outside run_option_keys() plus `extra`.
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& extra = {}) {
    if (!j.is_object()) throw InvalidArgument("configuration must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!run_option_keys().count(key) && !extra.count(key)) throw InvalidArgument("unknown configuration key '" + key + "'");
}

/// Overwrites the fields present in `j`; validates types and ranges.
/// Leaves `out` untouched on error.
inline void apply_json(const nlohmann::json& j, RunOptions& out, const std::set<std::string>& extra = {}) {
    check_keys(j, extra);
    RunOptions o = out;
    try {
        if (j.contains("variant")) o.seg.variant = parse_variant(j.at("variant").get<std::string>());
        if (j.contains("rho")) o.seg.rho = j.at("rho").get<double>();
        if (j.contains("lambda")) o.seg.lambda = j.at("lambda").get<double>();
        if (j.contains("threshold")) o.seg.threshold = j.at("threshold").get<double>();
        if (j.contains("tol")) o.seg.tol = j.at("tol").get<double>();
        if (j.contains("max_iter")) o.seg.max_iter = j.at("max_iter").get<std::size_t>();
        if (j.contains("precond_r")) o.seg.precond_r = j.at("precond_r").get<double>();
        if (j.contains("precond_delta")) o.seg.precond_delta = j.at("precond_delta").get<double>();
        if (j.contains("precond_gamma")) o.seg.precond_gamma = j.at("precond_gamma").get<double>();
        if (j.contains("features")) o.features = parse_feature_kind(j.at("features").get<std::string>());
        if (j.contains("bins")) o.bins = j.at("bins").get<std::size_t>();
        if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("configuration: ") + e.what());
    }
    o.seg.validate();
    out = std::move(o);
}

inline nlohmann::json to_json(const RunOptions& o) {
    return {{"variant", to_string(o.seg.variant)},
            {"rho", o.seg.rho},
            {"lambda", o.seg.lambda},
            {"threshold", o.seg.threshold},
            {"tol", o.seg.tol},
            {"max_iter", o.seg.max_iter},
            {"precond_r", o.seg.precond_r},
            {"precond_delta", o.seg.precond_delta},
            {"precond_gamma", o.seg.precond_gamma},
            {"features", o.features == FeatureKind::rgb ? "rgb" : "gradnorm"},
            {"bins", o.bins},
            {"seed", o.seed}};
}

inline void set_threads(std::size_t n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(int(n));
#else
    (void)n;
#endif
}

struct Quantized {
    Codebook codebook;
    AssignmentOperator op;
    CostMatrix cost;
};

/// Codebook learned on the image (or the given one), hard assignment and ground cost.
inline Quantized quantize(const Image& img, FeatureKind kind, std::size_t bins, std::uint64_t seed,
                          const Codebook* given = nullptr) {
    const auto feats = extract_features(img, kind);
    Quantized q;
    q.codebook = given ? *given : kmeans(feats, bins ? bins : default_bins(feats.dim), seed);
    q.op = build_assignment(feats, q.codebook);
    q.cost = default_cost(q.codebook.centroids, q.codebook.centroids);
    return q;
}

struct SupervisedOutput {
    SegResult result;
    std::vector<std::uint8_t> label_values;  ///< scribble label of each phase
    std::vector<std::vector<std::uint16_t>> prob16;  ///< one per map
};

/// Two labels give the two-phase model with the lower label as foreground; more give
/// the multi-phase model. Unused label values are skipped.
inline SupervisedOutput segment_scribbled(const Quantized& q, std::size_t w, std::size_t h,
                                          const std::vector<std::uint8_t>& scribbles, const SegConfig& cfg) {
    const auto set = ScribbleSet::from_index_map(w, h, scribbles);
    SupervisedOutput out;
    ScribbleSet used{w, h, {}};
    for (std::size_t k = 0; k < set.labels(); ++k)
        if (std::find(set.masks[k].begin(), set.masks[k].end(), 1) != set.masks[k].end()) {
            used.masks.push_back(set.masks[k]);
            out.label_values.push_back(std::uint8_t(k + 1));
        }
    if (used.labels() < 2)
        throw InsufficientLabels("at least two scribbled labels are needed, found " + std::to_string(used.labels()));
    const auto priors = prior_from_scribbles(q.op, used);
    const SegInput in{q.op, w, h, q.cost};
    out.result = priors.size() == 2 ? segment_two_phase(in, priors[0], priors[1], cfg) : segment_multi_phase(in, priors, cfg);
    for (const auto& u : out.result.u) out.prob16.push_back(quantize_prob16(u));
    return out;
}

/// Label image from the quantized maps, so a client rethresholding the prob16 PNG
/// gets the same answer: two-phase uses q / 65535 > t, multi-phase the argmax.
inline std::vector<std::uint8_t> label_values(const std::vector<std::vector<std::uint16_t>>& prob16,
                                              const std::vector<std::uint8_t>& values, double t) {
    if (prob16.empty() || values.size() != (prob16.size() == 1 ? 2 : prob16.size()))
        throw InvalidArgument("label_values: phase count mismatch");
    if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("threshold must lie in (0,1)");
    std::vector<std::vector<double>> maps;
    for (const auto& q : prob16) maps.push_back(dequantize_prob16(q));
    const auto idx = threshold_labels(maps, t);
    std::vector<std::uint8_t> out(idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p) out[p] = prob16.size() == 1 ? values[idx[p] ? 0 : 1] : values[idx[p]];
    return out;
}

inline std::vector<std::uint8_t> labels_png(const SupervisedOutput& o, double t) {
    return encode_gray8(o.result.width, o.result.height, label_values(o.prob16, o.label_values, t));
}

inline std::vector<std::uint8_t> prob16_png(const SupervisedOutput& o, std::size_t phase) {
    if (phase >= o.prob16.size()) throw InvalidArgument("phase out of range");
    return encode_gray16(o.result.width, o.result.height, o.prob16[phase]);
}

inline nlohmann::json summary(const SolveReport& r, double energy, double ambiguous) {
    return {{"energy", energy},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"near_binary_fraction", 1.0 - ambiguous},
            {"ambiguous_fraction", ambiguous},
            {"wall_seconds", r.wall_seconds}};
}

/// Per-class Jaccard over every value present in either map, and pixel accuracy.
inline nlohmann::json evaluate(const std::vector<std::uint8_t>& labels, const std::vector<std::uint8_t>& truth) {
    if (labels.size() != truth.size()) throw InvalidArgument("label and truth images differ in size");
    std::map<int, std::pair<std::size_t, std::size_t>> counts;  // intersection, union
    std::size_t correct = 0;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        correct += labels[p] == truth[p];
        if (labels[p] == truth[p]) {
            ++counts[labels[p]].first;
            ++counts[labels[p]].second;
        } else {
            ++counts[labels[p]].second;
            ++counts[truth[p]].second;
        }
    }
    nlohmann::json jac = nlohmann::json::object();
    for (const auto& [k, c] : counts) jac[std::to_string(k)] = double(c.first) / double(c.second);
    return {{"jaccard", jac}, {"accuracy", labels.empty() ? 1.0 : double(correct) / double(labels.size())}};
}

}  // namespace otseg::app
