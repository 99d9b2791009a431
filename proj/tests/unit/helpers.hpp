#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "spurious/corpus.hpp"

namespace testutil {

inline spurious::LabeledSentence sentence(std::int64_t id, const std::string& text, int label,
                                          spurious::Split split = spurious::Split::train) {
    return {id, spurious::tokenize(text), label, split};
}

inline std::vector<spurious::LabeledSentence> sentences(
    std::initializer_list<std::pair<int, const char*>> rows) {
    std::vector<spurious::LabeledSentence> out;
    std::int64_t id = 0;
    for (const auto& [label, text] : rows) out.push_back(sentence(id++, text, label));
    return out;
}

inline std::vector<spurious::LabeledSentence> relabel(std::vector<spurious::LabeledSentence> s) {
    for (auto& x : s) x.label = -x.label;
    return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("spurious_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
