// otseg command-line tool: codebooks, supervised segmentation, co-segmentation,
// evaluation and the HTTP service.

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "otseg/app/pipeline.hpp"
#include "otseg/app/service.hpp"
#include "otseg/features/codebook_io.hpp"
#include "otseg/io/png.hpp"
#include "otseg/io/raw.hpp"
#include "otseg/seg/coseg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace otseg;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotConverged = 3;

// Values settable from both flags and the --config file (which wins).
class Overlay {
public:
    template <class T>
    void bind(const std::string& key, T& target) {
        setters_[key] = [&target](const json& v) { target = v.get<T>(); };
    }

    void apply(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw Error("cannot read config '" + path + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
        for (const auto& [key, v] : j.items()) {
            auto it = setters_.find(key);
            if (it == setters_.end()) throw InvalidArgument("unknown config key '" + key + "'");
            try {
                it->second(v);
            } catch (const json::exception& e) {
                throw InvalidArgument("config key '" + key + "': " + e.what());
            }
        }
    }

private:
    std::map<std::string, std::function<void(const json&)>> setters_;
};

struct Common {
    std::string config;
    std::size_t threads = 0;
    bool allow_maxiter = false;
    std::string features = "rgb";
    std::size_t bins = 0;
    std::uint64_t seed = 0;
    double rho = 1.0, lambda = 100.0, threshold = 0.5, tol = 1e-6;
    std::size_t max_iter = 5000;

    void add(CLI::App* app, Overlay& ov) {
        app->add_option("--config", config, "JSON file whose keys override the flags");
        app->add_option("--threads", threads, "worker threads (default: OTSEG_THREADS or all cores)");
        app->add_flag("--allow-maxiter", allow_maxiter, "exit 0 even if the solver hit max_iter");
        app->add_option("--features", features, "rgb or gradnorm")->check(CLI::IsMember({"rgb", "gradnorm"}));
        app->add_option("--bins", bins, "codebook size M (0: 8^dim)");
        app->add_option("--seed", seed, "k-means seed");
        app->add_option("--rho", rho, "total variation weight");
        app->add_option("--lambda", lambda, "entropic parameter");
        app->add_option("--threshold", threshold, "label threshold t");
        app->add_option("--tol", tol, "solver tolerance");
        app->add_option("--max-iter", max_iter, "solver iteration cap");
        ov.bind("threads", threads);
        ov.bind("allow_maxiter", allow_maxiter);
        ov.bind("features", features);
        ov.bind("bins", bins);
        ov.bind("seed", seed);
        ov.bind("rho", rho);
        ov.bind("lambda", lambda);
        ov.bind("threshold", threshold);
        ov.bind("tol", tol);
        ov.bind("max_iter", max_iter);
    }

    void setup_threads() const {
        std::size_t n = threads;
        if (n == 0)
            if (const char* env = std::getenv("OTSEG_THREADS")) n = std::strtoull(env, nullptr, 10);
        app::set_threads(n);
    }
};

std::size_t worker_count(std::size_t threads) {
    if (threads) return threads;
    if (const char* env = std::getenv("OTSEG_THREADS"))
        if (auto n = std::strtoull(env, nullptr, 10)) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

Image load_image(const std::string& path) { return to_image(read_png(path)); }

int run_codebook(const std::vector<std::string>& images, Common& c, const std::string& out) {
    c.setup_threads();
    FeatureImage all;
    for (const auto& path : images) {
        const auto f = extract_features(load_image(path), parse_feature_kind(c.features));
        if (all.dim && all.dim != f.dim) throw InvalidArgument("images yield different feature dimensions");
        all.dim = f.dim;
        all.width = 1;
        all.height += f.pixels();
        all.values.insert(all.values.end(), f.values.begin(), f.values.end());
    }
    const auto cb = kmeans(all, c.bins ? c.bins : default_bins(all.dim), c.seed);
    save_codebook(out, cb);
    std::cout << json{{"bins", cb.bins()}, {"dim", cb.dim}, {"out", out}}.dump() << '\n';
    return 0;
}

struct SegmentArgs {
    std::string image, scribbles, codebook, variant = "sinkhorn_grad", out_prob, out_labels, out_raw;
};

int run_segment(const SegmentArgs& a, const Common& c) {
    c.setup_threads();
    app::RunOptions o;
    o.seg.variant = parse_variant(a.variant);
    o.seg.rho = c.rho;
    o.seg.lambda = c.lambda;
    o.seg.threshold = c.threshold;
    o.seg.tol = c.tol;
    o.seg.max_iter = c.max_iter;
    o.features = parse_feature_kind(c.features);
    o.bins = c.bins;
    o.seed = c.seed;
    o.seg.validate();

    const Image img = load_image(a.image);
    const auto raster = read_png(a.scribbles);
    if (raster.width != img.width || raster.height != img.height)
        throw InvalidArgument("scribble mask size does not match the image");
    std::optional<Codebook> cb;
    if (!a.codebook.empty()) cb = load_codebook(a.codebook);
    const auto q = app::quantize(img, o.features, o.bins, o.seed, cb ? &*cb : nullptr);
    const auto out = app::segment_scribbled(q, img.width, img.height, to_index_map(raster), o.seg);

    if (!a.out_labels.empty()) write_file_bytes(a.out_labels, app::labels_png(out, o.seg.threshold));
    const bool single = out.prob16.size() == 1;
    for (std::size_t k = 0; k < out.prob16.size(); ++k) {
        const std::string suffix = single ? "" : "_" + std::to_string(out.label_values[k]);
        if (!a.out_prob.empty()) write_file_bytes(with_suffix(a.out_prob, suffix), app::prob16_png(out, k));
        if (!a.out_raw.empty())
            write_file_bytes(with_suffix(a.out_raw, suffix), encode_raw_prob(img.width, img.height, out.result.u[k]));
    }
    auto s = app::summary(out.result.report, out.result.energy, out.result.ambiguous_fraction);
    s["variant"] = to_string(o.seg.variant);
    s["phases"] = out.prob16.size();
    std::cout << s.dump() << '\n';
    if (!out.result.report.converged && !c.allow_maxiter) {
        std::cerr << "otseg: solver stopped at max_iter without converging (use --allow-maxiter to accept)\n";
        return kExitNotConverged;
    }
    return 0;
}

struct CosegArgs {
    std::vector<std::string> images;
    std::string variant = "pairwise", distance = "l1", out_dir;
    double delta = 1.0;
};

int run_coseg(const CosegArgs& a, const Common& c) {
    c.setup_threads();
    if (a.images.size() < 2) throw InvalidArgument("co-segmentation needs at least two images");
    const auto kind = parse_feature_kind(c.features);
    std::vector<Image> images;
    std::vector<FeatureImage> feats;
    FeatureImage all;
    for (const auto& path : a.images) {
        images.push_back(load_image(path));
        feats.push_back(extract_features(images.back(), kind));
        if (all.dim && all.dim != feats.back().dim) throw InvalidArgument("images yield different feature dimensions");
        all.dim = feats.back().dim;
        all.width = 1;
        all.height += feats.back().pixels();
        all.values.insert(all.values.end(), feats.back().values.begin(), feats.back().values.end());
    }
    const auto cb = kmeans(all, c.bins ? c.bins : default_bins(all.dim), c.seed);
    std::vector<AssignmentOperator> ops;
    for (const auto& f : feats) ops.push_back(build_assignment(f, cb));
    std::vector<CosegImage> inputs;
    for (std::size_t k = 0; k < images.size(); ++k) inputs.push_back({&ops[k], images[k].width, images[k].height});

    CosegConfig cfg;
    cfg.variant = parse_coseg_variant(a.variant);
    cfg.distance = parse_variant(a.distance);
    cfg.rho = c.rho;
    cfg.delta = a.delta;
    cfg.lambda = c.lambda;
    cfg.threshold = c.threshold;
    cfg.tol = c.tol;
    cfg.max_iter = c.max_iter;
    if (cfg.distance != Variant::l1) cfg.cost = default_cost(cb.centroids, cb.centroids);
    const auto res = coseg_multi(inputs, cfg);
    for (const auto& w : res.warnings) std::cerr << "otseg: warning: " << w << '\n';

    fs::create_directories(a.out_dir);
    for (std::size_t k = 0; k < images.size(); ++k) {
        const auto name = std::to_string(k);
        write_file_bytes((fs::path(a.out_dir) / ("mask_" + name + ".png")).string(),
                         encode_gray8(images[k].width, images[k].height, res.masks[k]));
        write_file_bytes((fs::path(a.out_dir) / ("prob_" + name + ".png")).string(),
                         encode_gray16(images[k].width, images[k].height, quantize_prob16(res.u[k])));
    }
    if (!res.barycenter.empty()) {
        std::ofstream os(fs::path(a.out_dir) / "barycenter.json");
        os << json{{"bins", res.barycenter.size()}, {"histogram", res.barycenter}}.dump(2) << '\n';
    }
    json s{{"energy", res.energy},
           {"iterations", res.report.iterations},
           {"converged", res.report.converged},
           {"wall_seconds", res.report.wall_seconds},
           {"variant", to_string(cfg.variant)},
           {"distance", to_string(cfg.distance)},
           {"warnings", res.warnings}};
    std::ofstream(fs::path(a.out_dir) / "summary.json") << s.dump(2) << '\n';
    std::cout << s.dump() << '\n';
    if (!res.report.converged && !c.allow_maxiter) {
        std::cerr << "otseg: solver stopped at max_iter without converging (use --allow-maxiter to accept)\n";
        return kExitNotConverged;
    }
    return 0;
}

int run_eval(const std::string& labels, const std::string& truth) {
    const auto a = read_png(labels), b = read_png(truth);
    if (a.width != b.width || a.height != b.height) throw InvalidArgument("label and truth images differ in size");
    std::cout << app::evaluate(to_index_map(a), to_index_map(b)).dump() << '\n';
    return 0;
}

struct ServeArgs {
    std::string host = "127.0.0.1", cors = "*";
    int port = 8080;
    std::size_t ttl = 3600, cache = 32;
};

int run_serve(const ServeArgs& a, const Common& c) {
    app::ServiceOptions opt;
    opt.workers = worker_count(c.threads);
    opt.session_ttl = std::chrono::seconds(a.ttl);
    opt.result_cache = a.cache;
    opt.cors_origin = a.cors;
    app::set_threads(1);
    app::Service service(opt);
    httplib::Server srv;
    service.mount(srv);
    std::cerr << "otseg: serving on http://" << a.host << ':' << a.port << " with " << opt.workers << " worker(s)\n";
    if (!srv.listen(a.host, a.port)) {
        std::cerr << "otseg: cannot listen on " << a.host << ':' << a.port << '\n';
        return kExitError;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Histogram-based convex segmentation with optimal transport"};
    cli.require_subcommand(1);

    Overlay cb_ov, seg_ov, co_ov, ev_ov, srv_ov;
    Common cb_c, seg_c, co_c, srv_c;

    auto* cb = cli.add_subcommand("codebook", "learn a k-means codebook from images");
    std::vector<std::string> cb_images;
    std::string cb_out;
    cb->add_option("--image", cb_images, "input PNG (repeatable)")->required();
    cb->add_option("--out", cb_out, "codebook JSON path")->required();
    cb_c.add(cb, cb_ov);
    cb_ov.bind("image", cb_images);
    cb_ov.bind("out", cb_out);

    auto* seg = cli.add_subcommand("segment", "scribble-supervised segmentation");
    SegmentArgs sa;
    seg->add_option("--image", sa.image, "input PNG")->required();
    seg->add_option("--scribbles", sa.scribbles, "index PNG, 0 unlabeled, k label k")->required();
    seg->add_option("--codebook", sa.codebook, "codebook JSON (default: learn on the image)");
    seg->add_option("--variant", sa.variant, "l1, mk_exact, sinkhorn_grad or sinkhorn_prox");
    seg->add_option("--out-prob", sa.out_prob, "16-bit probability PNG (one per phase when more than two labels)");
    seg->add_option("--out-labels", sa.out_labels, "label PNG holding scribble label values");
    seg->add_option("--out-raw", sa.out_raw, "raw OTSGPROB dump of the probability maps");
    seg_c.add(seg, seg_ov);
    seg_ov.bind("image", sa.image);
    seg_ov.bind("scribbles", sa.scribbles);
    seg_ov.bind("codebook", sa.codebook);
    seg_ov.bind("variant", sa.variant);
    seg_ov.bind("out_prob", sa.out_prob);
    seg_ov.bind("out_labels", sa.out_labels);
    seg_ov.bind("out_raw", sa.out_raw);

    auto* co = cli.add_subcommand("coseg", "unsupervised co-segmentation");
    CosegArgs ca;
    co->add_option("--images", ca.images, "two or more PNGs")->required();
    co->add_option("--variant", ca.variant, "pairwise, pairwise_multi or barycentric_l1");
    co->add_option("--distance", ca.distance, "dissimilarity for pairwise variants");
    co->add_option("--delta", ca.delta, "ballooning weight");
    co->add_option("--out-dir", ca.out_dir, "output directory")->required();
    co_c.add(co, co_ov);
    co_ov.bind("images", ca.images);
    co_ov.bind("variant", ca.variant);
    co_ov.bind("distance", ca.distance);
    co_ov.bind("delta", ca.delta);
    co_ov.bind("out_dir", ca.out_dir);

    auto* ev = cli.add_subcommand("eval", "per-class Jaccard and pixel accuracy");
    std::string ev_labels, ev_truth, ev_config;
    ev->add_option("--labels", ev_labels, "label PNG")->required();
    ev->add_option("--truth", ev_truth, "ground-truth PNG")->required();
    ev->add_option("--config", ev_config, "JSON file whose keys override the flags");
    ev_ov.bind("labels", ev_labels);
    ev_ov.bind("truth", ev_truth);

    auto* sv = cli.add_subcommand("serve", "run the HTTP service");
    ServeArgs sva;
    sv->add_option("--host", sva.host, "bind address");
    sv->add_option("--port", sva.port, "TCP port");
    sv->add_option("--ttl", sva.ttl, "idle session lifetime in seconds");
    sv->add_option("--cache", sva.cache, "results kept in memory");
    sv->add_option("--cors-origin", sva.cors, "Access-Control-Allow-Origin value");
    srv_c.add(sv, srv_ov);
    srv_ov.bind("host", sva.host);
    srv_ov.bind("port", sva.port);
    srv_ov.bind("ttl", sva.ttl);
    srv_ov.bind("cache", sva.cache);
    srv_ov.bind("cors_origin", sva.cors);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (cb->parsed()) {
            cb_ov.apply(cb_c.config);
            return run_codebook(cb_images, cb_c, cb_out);
        }
        if (seg->parsed()) {
            seg_ov.apply(seg_c.config);
            return run_segment(sa, seg_c);
        }
        if (co->parsed()) {
            co_ov.apply(co_c.config);
            return run_coseg(ca, co_c);
        }
        if (ev->parsed()) {
            ev_ov.apply(ev_config);
            return run_eval(ev_labels, ev_truth);
        }
        if (sv->parsed()) {
            srv_ov.apply(srv_c.config);
            return run_serve(sva, srv_c);
        }
    } catch (const std::exception& e) {
        std::cerr << "otseg: error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
