#pragma once

// Interactive segmentation service: sessions hold an uploaded image and its
// scribbles, solves run as jobs on a worker pool, results are cached in memory.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "otseg/app/pipeline.hpp"
#include "otseg/io/png.hpp"

namespace otseg::app {

struct ServiceOptions {
    std::size_t workers = 1;
    std::chrono::seconds session_ttl{3600};
    std::size_t result_cache = 32;  ///< results kept in memory (least recently used evicted)
    std::string cors_origin = "*";
};

enum class JobStatus { queued, running, done, failed, cancelled };

inline const char* to_string(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
        case JobStatus::cancelled: return "cancelled";
    }
    return "?";
}

class Service {
public:
    using Clock = std::chrono::steady_clock;

    explicit Service(ServiceOptions opt = {}) : opt_(std::move(opt)), now_([] { return Clock::now(); }) {
        std::random_device rd;
        rng_.seed((std::uint64_t(rd()) << 32) ^ rd());
        for (std::size_t k = 0; k < std::max<std::size_t>(1, opt_.workers); ++k)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~Service() {
        {
            std::lock_guard lk(mu_);
            stopping_ = true;
            for (auto& [id, job] : jobs_) job->cancel = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Replaces the time source used for session expiry.
    void set_clock(std::function<Clock::time_point()> now) {
        std::lock_guard lk(mu_);
        now_ = std::move(now);
    }

    void mount(httplib::Server& srv) {
        srv.set_default_headers({{"Access-Control-Allow-Origin", opt_.cors_origin},
                                 {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
        srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        srv.Get("/spec", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(openapi().dump(2), "application/json");
        });
        srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
        srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create_session(req, res); });
        srv.Get(R"(/sessions/([0-9a-f]+))",
                [this](const httplib::Request& req, httplib::Response& res) { get_session(req.matches[1], res); });
        srv.Delete(R"(/sessions/([0-9a-f]+))",
                   [this](const httplib::Request& req, httplib::Response& res) { delete_session(req.matches[1], res); });
        srv.Get(R"(/sessions/([0-9a-f]+)/image)",
                [this](const httplib::Request& req, httplib::Response& res) { get_image(req.matches[1], res); });
        srv.Put(R"(/sessions/([0-9a-f]+)/scribbles)",
                [this](const httplib::Request& req, httplib::Response& res) { put_scribbles(req, res); });
        srv.Get(R"(/sessions/([0-9a-f]+)/scribbles)",
                [this](const httplib::Request& req, httplib::Response& res) { get_scribbles(req.matches[1], res); });
        srv.Post(R"(/sessions/([0-9a-f]+)/solve)",
                 [this](const httplib::Request& req, httplib::Response& res) { solve(req, res); });
        srv.Get(R"(/sessions/([0-9a-f]+)/result)",
                [this](const httplib::Request& req, httplib::Response& res) { get_result(req, res); });
        srv.Get(R"(/jobs/([0-9a-f]+))",
                [this](const httplib::Request& req, httplib::Response& res) { get_job(req.matches[1], res); });
        srv.Delete(R"(/jobs/([0-9a-f]+))",
                   [this](const httplib::Request& req, httplib::Response& res) { cancel_job(req.matches[1], res); });
    }

    static nlohmann::json openapi();

private:
    struct Session {
        std::string id;
        std::vector<std::uint8_t> upload;
        std::shared_ptr<const Image> image;
        std::vector<std::uint8_t> scribbles;
        std::map<std::string, std::shared_ptr<const Quantized>> quantized;  ///< by features/bins/seed
        std::string latest_job;
        std::string result_job;  ///< job whose result is cached
        bool running = false;
        Clock::time_point updated;
    };

    struct Job {
        std::string id, session_id;
        RunOptions options;
        std::vector<std::uint8_t> scribbles;
        JobStatus status = JobStatus::queued;
        double progress = 0.0;
        std::size_t iteration = 0;
        std::string error;
        nlohmann::json summary;
        std::atomic<bool> cancel{false};
        Clock::time_point finished;
    };

    static void error(httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
    }

    std::string token() {
        static const char* hex = "0123456789abcdef";
        std::string s(16, '0');
        auto v = rng_();
        for (auto& c : s) {
            c = hex[v & 15];
            v >>= 4;
        }
        return s;
    }

    // Drops idle sessions (no running job) and finished jobs older than the TTL. Caller holds mu_.
    void sweep() {
        const auto now = now_();
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (!it->second->running && now - it->second->updated > opt_.session_ttl) {
                drop_result(it->first);
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
        for (auto it = jobs_.begin(); it != jobs_.end();) {
            const auto st = it->second->status;
            const bool finished = st == JobStatus::done || st == JobStatus::failed || st == JobStatus::cancelled;
            if (finished && now - it->second->finished > opt_.session_ttl)
                it = jobs_.erase(it);
            else
                ++it;
        }
    }

    std::shared_ptr<Session> find_session(const std::string& id) {
        sweep();
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return nullptr;
        it->second->updated = now_();
        return it->second;
    }

    void store_result(const std::string& session, std::shared_ptr<const SupervisedOutput> r) {
        drop_result(session);
        lru_.push_front(session);
        results_[session] = {std::move(r), lru_.begin()};
        while (results_.size() > std::max<std::size_t>(1, opt_.result_cache)) {
            results_.erase(lru_.back());
            lru_.pop_back();
        }
    }

    void drop_result(const std::string& session) {
        auto it = results_.find(session);
        if (it == results_.end()) return;
        lru_.erase(it->second.second);
        results_.erase(it);
    }

    std::shared_ptr<const SupervisedOutput> touch_result(const std::string& session) {
        auto it = results_.find(session);
        if (it == results_.end()) return nullptr;
        lru_.splice(lru_.begin(), lru_, it->second.second);
        return it->second.first;
    }

    void create_session(const httplib::Request& req, httplib::Response& res) {
        std::string body = req.body;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("image")) return error(res, 422, "multipart upload needs an 'image' field");
            body = req.get_file_value("image").content;
        }
        std::vector<std::uint8_t> bytes(body.begin(), body.end());
        // A zero dimension is a valid-looking header that libpng refuses; report it as such.
        if (bytes.size() >= 24 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
            const auto be32 = [&](std::size_t at) {
                return (std::uint32_t(bytes[at]) << 24) | (std::uint32_t(bytes[at + 1]) << 16) |
                       (std::uint32_t(bytes[at + 2]) << 8) | bytes[at + 3];
            };
            if (be32(16) == 0 || be32(20) == 0) return error(res, 422, "image has zero width or height");
        }
        Image img;
        try {
            img = to_image(decode_png(bytes));
        } catch (const UnsupportedFormat& e) {
            return error(res, 415, e.what());
        }
        if (img.pixels() == 0) return error(res, 422, "image has zero width or height");
        auto s = std::make_shared<Session>();
        s->upload = std::move(bytes);
        s->scribbles.assign(img.pixels(), 0);
        s->image = std::make_shared<const Image>(std::move(img));
        std::lock_guard lk(mu_);
        sweep();
        do s->id = token();
        while (sessions_.count(s->id));
        s->updated = now_();
        sessions_[s->id] = s;
        res.status = 201;
        res.set_content(nlohmann::json{{"session_id", s->id}, {"width", s->image->width}, {"height", s->image->height}}.dump(),
                        "application/json");
    }

    void get_session(const std::string& id, httplib::Response& res) {
        std::lock_guard lk(mu_);
        auto s = find_session(id);
        if (!s) return error(res, 404, "unknown session");
        std::set<int> labels;
        for (auto v : s->scribbles)
            if (v) labels.insert(v);
        res.set_content(nlohmann::json{{"session_id", s->id},
                                       {"width", s->image->width},
                                       {"height", s->image->height},
                                       {"labels", labels},
                                       {"latest_job", s->latest_job},
                                       {"has_result", results_.count(id) > 0}}
                            .dump(),
                        "application/json");
    }

    void delete_session(const std::string& id, httplib::Response& res) {
        std::lock_guard lk(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return error(res, 404, "unknown session");
        for (auto& [jid, job] : jobs_)
            if (job->session_id == id) {
                job->cancel = true;
                if (job->status == JobStatus::queued) finish(*job, JobStatus::cancelled);
            }
        drop_result(id);
        sessions_.erase(it);
        res.status = 204;
    }

    void get_image(const std::string& id, httplib::Response& res) {
        std::lock_guard lk(mu_);
        auto s = find_session(id);
        if (!s) return error(res, 404, "unknown session");
        res.set_content(std::string(s->upload.begin(), s->upload.end()), "image/png");
    }

    void get_scribbles(const std::string& id, httplib::Response& res) {
        std::vector<std::uint8_t> mask;
        std::size_t w = 0, h = 0;
        {
            std::lock_guard lk(mu_);
            auto s = find_session(id);
            if (!s) return error(res, 404, "unknown session");
            mask = s->scribbles;
            w = s->image->width;
            h = s->image->height;
        }
        const auto png = encode_gray8(w, h, mask);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
    }

    void put_scribbles(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        std::size_t w = 0, h = 0;
        std::vector<std::uint8_t> mask;
        {
            std::lock_guard lk(mu_);
            auto s = find_session(id);
            if (!s) return error(res, 404, "unknown session");
            w = s->image->width;
            h = s->image->height;
            mask = s->scribbles;
        }
        const std::vector<std::uint8_t> bytes(req.body.begin(), req.body.end());
        if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
            try {
                const auto raster = decode_png(bytes);
                if (raster.width != w || raster.height != h) return error(res, 422, "mask size does not match the image");
                mask = to_index_map(raster);
            } catch (const UnsupportedFormat& e) {
                return error(res, 415, e.what());
            }
        } else {
            try {
                const auto j = nlohmann::json::parse(req.body);
                if (!j.is_object()) return error(res, 422, "expected a JSON object");
                for (const auto& [key, v] : j.items())
                    if (key != "strokes" && key != "clear") return error(res, 422, "unknown key '" + key + "'");
                if (j.value("clear", false)) std::fill(mask.begin(), mask.end(), 0);
                std::vector<Stroke> strokes;
                for (const auto& s : j.value("strokes", nlohmann::json::array())) {
                    Stroke st;
                    const int label = s.at("label").get<int>();
                    if (label < 0 || label > 255) return error(res, 422, "stroke label must lie in [0,255]");
                    st.label = std::uint8_t(label);
                    st.radius = s.value("radius", 0);
                    for (const auto& pt : s.at("points")) {
                        if (!pt.is_array() || pt.size() != 2) return error(res, 422, "points are [x, y] pairs");
                        st.points.push_back({pt[0].get<long>(), pt[1].get<long>()});
                    }
                    strokes.push_back(std::move(st));
                }
                rasterize_strokes(mask, w, h, strokes);
            } catch (const nlohmann::json::exception& e) {
                return error(res, 422, std::string("malformed scribbles: ") + e.what());
            } catch (const InvalidArgument& e) {
                return error(res, 422, e.what());
            }
        }
        std::lock_guard lk(mu_);
        auto s = find_session(id);
        if (!s) return error(res, 404, "unknown session");
        s->scribbles = std::move(mask);
        res.status = 204;
    }

    void solve(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        RunOptions opts;
        try {
            if (!req.body.empty()) apply_json(nlohmann::json::parse(req.body), opts);
        } catch (const nlohmann::json::exception& e) {
            return error(res, 422, std::string("malformed configuration: ") + e.what());
        } catch (const InvalidArgument& e) {
            return error(res, 422, e.what());
        }
        std::lock_guard lk(mu_);
        auto s = find_session(id);
        if (!s) return error(res, 404, "unknown session");
        std::set<int> labels;
        for (auto v : s->scribbles)
            if (v) labels.insert(v);
        if (labels.size() < 2)
            return error(res, 409, "at least two scribbled labels are needed before solving, found " +
                                       std::to_string(labels.size()));
        for (auto& [jid, job] : jobs_)
            if (job->session_id == id && job->status == JobStatus::queued) finish(*job, JobStatus::cancelled);
        auto job = std::make_shared<Job>();
        do job->id = token();
        while (jobs_.count(job->id));
        job->session_id = id;
        job->options = opts;
        job->scribbles = s->scribbles;
        jobs_[job->id] = job;
        queue_.push_back(job);
        s->latest_job = job->id;
        cv_.notify_all();
        res.status = 202;
        res.set_content(nlohmann::json{{"job_id", job->id}}.dump(), "application/json");
    }

    void get_job(const std::string& id, httplib::Response& res) {
        std::lock_guard lk(mu_);
        sweep();
        auto it = jobs_.find(id);
        if (it == jobs_.end()) return error(res, 404, "unknown job");
        const auto& j = *it->second;
        nlohmann::json out{{"job_id", j.id},
                           {"session_id", j.session_id},
                           {"status", to_string(j.status)},
                           {"progress", j.progress},
                           {"iteration", j.iteration},
                           {"config", to_json(j.options)}};
        if (j.status == JobStatus::failed) out["error"] = j.error;
        if (j.status == JobStatus::done) out["summary"] = j.summary;
        res.set_content(out.dump(), "application/json");
    }

    void cancel_job(const std::string& id, httplib::Response& res) {
        std::lock_guard lk(mu_);
        auto it = jobs_.find(id);
        if (it == jobs_.end()) return error(res, 404, "unknown job");
        it->second->cancel = true;
        if (it->second->status == JobStatus::queued) finish(*it->second, JobStatus::cancelled);
        res.status = 204;
    }

    void get_result(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "labels";
        if (format != "labels" && format != "prob16") return error(res, 422, "format must be labels or prob16");
        double t = 0.5;
        std::size_t phase = 0;
        try {
            if (req.has_param("threshold")) t = std::stod(req.get_param_value("threshold"));
            if (req.has_param("phase")) phase = std::stoul(req.get_param_value("phase"));
        } catch (const std::exception&) {
            return error(res, 422, "malformed threshold or phase");
        }
        if (!(t > 0.0 && t < 1.0)) return error(res, 422, "threshold must lie in (0,1)");
        std::shared_ptr<const SupervisedOutput> r;
        {
            std::lock_guard lk(mu_);
            if (!find_session(id)) return error(res, 404, "unknown session");
            r = touch_result(id);
        }
        if (!r) return error(res, 404, "no result for this session");
        if (format == "prob16" && phase >= r->prob16.size()) return error(res, 422, "phase out of range");
        const auto png = format == "labels" ? labels_png(*r, t) : prob16_png(*r, phase);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
    }

    // Caller holds mu_.
    void finish(Job& job, JobStatus st) {
        job.status = st;
        job.finished = now_();
    }

    // Next queued job whose session is idle. Caller holds mu_.
    std::shared_ptr<Job> take_job() {
        std::erase_if(queue_, [](const auto& j) { return j->status != JobStatus::queued; });
        for (auto it = queue_.begin(); it != queue_.end(); ++it) {
            auto s = sessions_.find((*it)->session_id);
            if (s == sessions_.end()) {
                finish(**it, JobStatus::cancelled);
                continue;
            }
            if (s->second->running) continue;
            auto job = *it;
            queue_.erase(it);
            return job;
        }
        return nullptr;
    }

    void worker_loop() {
        std::unique_lock lk(mu_);
        while (true) {
            std::shared_ptr<Job> job;
            cv_.wait(lk, [&] { return stopping_ || (job = take_job()) != nullptr; });
            if (stopping_) return;
            auto session = sessions_.at(job->session_id);
            session->running = true;
            job->status = JobStatus::running;
            const auto key = std::to_string(int(job->options.features)) + "/" + std::to_string(job->options.bins) + "/" +
                             std::to_string(job->options.seed);
            auto quant = session->quantized.count(key) ? session->quantized[key] : nullptr;
            auto image = session->image;
            lk.unlock();

            JobStatus final_status = JobStatus::done;
            std::string reason;
            nlohmann::json summary_json;
            std::shared_ptr<const SupervisedOutput> out;
            try {
                if (!quant) {
                    quant = std::make_shared<const Quantized>(
                        quantize(*image, job->options.features, job->options.bins, job->options.seed));
                    std::lock_guard g(mu_);
                    session->quantized[key] = quant;
                }
                SegConfig cfg = job->options.seg;
                const double max_iter = double(cfg.max_iter);
                cfg.progress = [this, job, max_iter](std::size_t it, double) {
                    std::lock_guard g(mu_);
                    job->iteration = it;
                    job->progress = std::max(job->progress, std::min(1.0, double(it) / max_iter));
                    return !job->cancel.load();
                };
                auto r = std::make_shared<SupervisedOutput>(
                    segment_scribbled(*quant, image->width, image->height, job->scribbles, cfg));
                if (r->result.report.cancelled || job->cancel) {
                    final_status = JobStatus::cancelled;
                } else {
                    summary_json = summary(r->result.report, r->result.energy, r->result.ambiguous_fraction);
                    out = std::move(r);
                }
            } catch (const std::exception& e) {
                final_status = job->cancel ? JobStatus::cancelled : JobStatus::failed;
                reason = e.what();
            }

            lk.lock();
            session->running = false;
            if (final_status == JobStatus::done) {
                job->progress = 1.0;
                job->iteration = out->result.report.iterations;
                job->summary = std::move(summary_json);
                if (sessions_.count(job->session_id)) {
                    store_result(job->session_id, out);
                    session->result_job = job->id;
                }
            }
            job->error = reason;
            finish(*job, final_status);
            cv_.notify_all();
        }
    }

    ServiceOptions opt_;
    std::function<Clock::time_point()> now_;
    std::mt19937_64 rng_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::unordered_map<std::string, std::shared_ptr<Job>> jobs_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::list<std::string> lru_;
    std::unordered_map<std::string, std::pair<std::shared_ptr<const SupervisedOutput>, std::list<std::string>::iterator>>
        results_;
    std::vector<std::thread> workers_;
};

inline nlohmann::json Service::openapi() {
    using nlohmann::json;
    const json id_param = {{"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    auto with_name = [&](const char* name) {
        json p = id_param;
        p["name"] = name;
        return p;
    };
    const json err = {{"description", "error"},
                      {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Error"}}}}}}}};
    const json png = {{"content", {{"image/png", {{"schema", {{"type", "string"}, {"format", "binary"}}}}}}}};
    json config_props;
    for (const auto& k : run_option_keys()) config_props[k] = json::object();
    config_props["variant"] = {{"type", "string"}, {"enum", {"l1", "mk_exact", "sinkhorn_grad", "sinkhorn_prox"}}};
    config_props["features"] = {{"type", "string"}, {"enum", {"rgb", "gradnorm"}}};
    for (const char* k : {"rho", "lambda", "threshold", "tol", "precond_r", "precond_delta", "precond_gamma"})
        config_props[k] = {{"type", "number"}};
    for (const char* k : {"max_iter", "bins", "seed"}) config_props[k] = {{"type", "integer"}, {"minimum", 0}};

    json paths;
    paths["/sessions"]["post"] = {
        {"summary", "Create a session from a PNG image"},
        {"requestBody", png},
        {"responses",
         {{"201", {{"description", "created"},
                   {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Session"}}}}}}}}},
          {"415", err},
          {"422", err}}}};
    paths["/sessions/{id}"]["get"] = {{"parameters", {with_name("id")}},
                                      {"responses", {{"200", {{"description", "session metadata"}}}, {"404", err}}}};
    paths["/sessions/{id}"]["delete"] = {{"parameters", {with_name("id")}},
                                         {"responses", {{"204", {{"description", "deleted"}}}, {"404", err}}}};
    paths["/sessions/{id}/image"]["get"] = {{"parameters", {with_name("id")}},
                                            {"responses", {{"200", png}, {"404", err}}}};
    paths["/sessions/{id}/scribbles"]["put"] = {
        {"summary", "Replace the scribble mask (indexed PNG) or paint strokes onto it"},
        {"parameters", {with_name("id")}},
        {"requestBody",
         {{"content",
           {{"image/png", {{"schema", {{"type", "string"}, {"format", "binary"}}}}},
            {"application/json", {{"schema", {{"$ref", "#/components/schemas/Strokes"}}}}}}}}},
        {"responses", {{"204", {{"description", "stored"}}}, {"404", err}, {"415", err}, {"422", err}}}};
    paths["/sessions/{id}/scribbles"]["get"] = {{"parameters", {with_name("id")}},
                                                {"responses", {{"200", png}, {"404", err}}}};
    paths["/sessions/{id}/solve"]["post"] = {
        {"parameters", {with_name("id")}},
        {"requestBody",
         {{"required", false},
          {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/SolveConfig"}}}}}}}}},
        {"responses",
         {{"202", {{"description", "queued"},
                   {"content", {{"application/json",
                                 {{"schema", {{"type", "object"}, {"properties", {{"job_id", {{"type", "string"}}}}}}}}}}}}},
          {"404", err},
          {"409", err},
          {"422", err}}}};
    paths["/sessions/{id}/result"]["get"] = {
        {"parameters",
         {with_name("id"),
          {{"name", "format"}, {"in", "query"}, {"schema", {{"type", "string"}, {"enum", {"labels", "prob16"}}}}},
          {{"name", "threshold"}, {"in", "query"}, {"schema", {{"type", "number"}, {"default", 0.5}}}},
          {{"name", "phase"}, {"in", "query"}, {"schema", {{"type", "integer"}, {"default", 0}}}}}},
        {"responses", {{"200", png}, {"404", err}, {"422", err}}}};
    paths["/jobs/{id}"]["get"] = {
        {"parameters", {with_name("id")}},
        {"responses",
         {{"200", {{"description", "job status"},
                   {"content", {{"application/json", {{"schema", {{"$ref", "#/components/schemas/Job"}}}}}}}}},
          {"404", err}}}};
    paths["/jobs/{id}"]["delete"] = {{"parameters", {with_name("id")}},
                                     {"responses", {{"204", {{"description", "cancellation requested"}}}, {"404", err}}}};
    paths["/spec"]["get"] = {{"responses", {{"200", {{"description", "this document"}}}}}};

    json schemas;
    schemas["Error"] = {{"type", "object"}, {"properties", {{"error", {{"type", "string"}}}}}};
    schemas["Session"] = {{"type", "object"},
                          {"properties",
                           {{"session_id", {{"type", "string"}}},
                            {"width", {{"type", "integer"}}},
                            {"height", {{"type", "integer"}}}}}};
    const json point = {{"type", "array"}, {"items", {{"type", "integer"}}}, {"minItems", 2}, {"maxItems", 2}};
    const json stroke = {{"type", "object"},
                         {"required", {"label", "points"}},
                         {"properties",
                          {{"label", {{"type", "integer"}, {"minimum", 0}, {"maximum", 255}}},
                           {"radius", {{"type", "integer"}, {"minimum", 0}}},
                           {"points", {{"type", "array"}, {"items", point}}}}}};
    schemas["Strokes"] = {{"type", "object"},
                          {"additionalProperties", false},
                          {"properties", {{"clear", {{"type", "boolean"}}}, {"strokes", {{"type", "array"}, {"items", stroke}}}}}};
    schemas["SolveConfig"] = {{"type", "object"}, {"additionalProperties", false}, {"properties", config_props}};
    schemas["Job"] = {{"type", "object"},
                      {"properties",
                       {{"job_id", {{"type", "string"}}},
                        {"session_id", {{"type", "string"}}},
                        {"status", {{"type", "string"}, {"enum", {"queued", "running", "done", "failed", "cancelled"}}}},
                        {"progress", {{"type", "number"}}},
                        {"iteration", {{"type", "integer"}}},
                        {"error", {{"type", "string"}}},
                        {"summary", {{"type", "object"}}}}}};
    return {{"openapi", "3.0.3"},
            {"info", {{"title", "otseg segmentation service"}, {"version", "1.0.0"}}},
            {"paths", paths},
            {"components", {{"schemas", schemas}}}};
}

}  // namespace otseg::app
