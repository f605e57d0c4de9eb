#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "otseg/error.hpp"
#include "otseg/features/kmeans.hpp"

namespace otseg {

inline nlohmann::json codebook_to_json(const Codebook& cb) {
    return nlohmann::json{{"dim", cb.dim}, {"centroids", cb.centroids}};
}

inline Codebook codebook_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("centroids"))
        throw InvalidArgument("codebook JSON needs 'dim' and 'centroids'");
    Codebook cb;
    cb.dim = j.at("dim").get<std::size_t>();
    cb.centroids = j.at("centroids").get<Centroids>();
    if (cb.centroids.empty()) throw InvalidArgument("codebook has no centroids");
    for (const auto& c : cb.centroids)
        if (c.size() != cb.dim) throw InvalidArgument("codebook centroid dimension mismatch");
    return cb;
}

inline void save_codebook(const std::string& path, const Codebook& cb) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    os << codebook_to_json(cb).dump(2) << '\n';
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read " + path);
    return codebook_from_json(nlohmann::json::parse(is));
}

}  // namespace otseg
