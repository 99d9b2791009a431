#include "spurious/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "spurious/error.hpp"
#include "spurious/rng.hpp"

namespace spurious {

namespace {

class Zipf {
public:
    Zipf(std::size_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cdf_[i] = total;
        }
        for (auto& c : cdf_) c /= total;
    }

    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

std::string token(const std::string& domain, const char* role, std::size_t i) {
    return domain + role + std::to_string(i);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticOptions& o) {
    if (o.n_spurious < 2 || o.n_spurious % 2 != 0) throw UsageError("n_spurious must be even and at least 2");
    if (!(o.rho > 0.5 && o.rho <= 1.0)) throw UsageError("rho must lie in (0.5, 1]");
    if (o.genuine_per_class < 1 || o.fillers < 1) throw UsageError("empty synthetic vocabulary");

    SyntheticCorpus out;
    const std::size_t half = o.n_spurious / 2;
    std::vector<std::string> genuine[2], spurious[2], fillers;  // [0] = -1, [1] = +1
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < o.genuine_per_class; ++i) {
            genuine[c].push_back(token(o.domain, c ? "gp" : "gn", i));
            out.labels.push_back({genuine[c].back(), WordClass::genuine, ""});
        }
        for (std::size_t i = 0; i < half; ++i) {
            spurious[c].push_back(token(o.domain, c ? "sp" : "sn", i));
            out.labels.push_back({spurious[c].back(), WordClass::spurious, ""});
            out.spurious_words.push_back(spurious[c].back());
        }
    }
    for (std::size_t i = 0; i < o.fillers; ++i) fillers.push_back(token(o.domain, "f", i));

    const Zipf genuine_dist(o.genuine_per_class, o.zipf_exponent);
    const Zipf filler_dist(o.fillers, o.zipf_exponent);
    Rng rng(mix_seed(o.seed, fnv1a(o.domain)));

    const auto filler = [&] { return fillers[filler_dist.draw(rng)]; };
    const auto add_fillers = [&](std::vector<std::string>& s, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) s.push_back(filler());
    };

    for (std::size_t n = 0; n < o.n_sentences; ++n) {
        const int label = n % 2 == 0 ? 1 : -1;
        const int c = label > 0 ? 1 : 0;
        const int spur_side = rng.uniform() < o.rho ? c : 1 - c;

        const std::string far_word = genuine[c][genuine_dist.draw(rng)];
        std::string near_word = genuine[c][genuine_dist.draw(rng)];
        while (o.genuine_per_class > 1 && near_word == far_word) near_word = genuine[c][genuine_dist.draw(rng)];
        const std::string spur = spurious[spur_side][rng.index(half)];

        std::vector<std::string> s;
        add_fillers(s, 1 + rng.index(3));
        s.push_back(far_word);
        add_fillers(s, 6 + rng.index(2));
        if (rng.index(2) == 0) {
            s.push_back(near_word);
            add_fillers(s, rng.index(2));
            s.push_back(spur);
        } else {
            s.push_back(spur);
            add_fillers(s, rng.index(2));
            s.push_back(near_word);
        }
        add_fillers(s, 1 + rng.index(3));
        if (rng.index(2) == 0) std::reverse(s.begin(), s.end());

        std::string text;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) text += ' ';
            text += s[i];
        }
        out.records.emplace_back(label, std::move(text));
    }
    return out;
}

std::string to_tsv(const SyntheticCorpus& corpus) {
    std::string out;
    for (const auto& [label, text] : corpus.records) out += std::to_string(label) + "\t" + text + "\n";
    return out;
}

}  // namespace spurious
