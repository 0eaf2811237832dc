#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entdisc/core.hpp"
#include "entdisc/rng.hpp"

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("entdisc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline entdisc::DetectionRecord det(const std::string& id, const std::string& video, std::int64_t frame,
                                    std::vector<double> emb, std::optional<std::string> gt = std::nullopt) {
    entdisc::DetectionRecord d;
    d.id = id;
    d.frame = {video, frame};
    d.box = {10, 10, 50, 60};
    d.embedding = std::move(emb);
    d.gt_label = std::move(gt);
    return d;
}

inline entdisc::MentionRecord mention(const std::string& video, std::int64_t frame, const std::string& surface) {
    return {{video, frame}, surface, std::nullopt};
}

inline entdisc::Matrix random_points(entdisc::Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    entdisc::Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// Points around `centers` well-separated blobs; labels returned through `truth`.
inline entdisc::Matrix blobs(entdisc::Rng& rng, const std::vector<std::vector<double>>& centers,
                             std::size_t per, double noise, std::vector<std::size_t>* truth = nullptr) {
    const std::size_t d = centers.front().size();
    entdisc::Matrix m(centers.size() * per, d);
    std::size_t r = 0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < per; ++i, ++r) {
            for (std::size_t j = 0; j < d; ++j) m(r, j) = centers[c][j] + noise * rng.normal();
            if (truth) truth->push_back(c);
        }
    return m;
}

}  // namespace testutil
