#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rrproc {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// The key is the user seed; the upper counter half is the substream id. Every
// Monte Carlo sample gets its own substream, so results do not depend on how
// samples are scheduled across worker threads.
class PhiloxRng {
  public:
    using result_type = uint64_t;

    explicit PhiloxRng(uint64_t seed = 0, uint64_t substream = 0) { reset(seed, substream); }

    void reset(uint64_t seed, uint64_t substream) {
        key_ = {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
        stream_ = substream;
        block_ = 0;
        buffered_ = 0;
    }

    // Jump to the substream for a given sample index (counter reset to 0).
    void set_substream(uint64_t substream) {
        stream_ = substream;
        block_ = 0;
        buffered_ = 0;
    }

    uint64_t operator()() {
        if (buffered_ == 0) fill();
        return buffer_[--buffered_];
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as input to -log().
    double uniform01_open() { return 1.0 - uniform01(); }

    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return std::numeric_limits<uint64_t>::max(); }

  private:
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    static void round_once(std::array<uint32_t, 4>& ctr, const std::array<uint32_t, 2>& key) {
        uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
        uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
        uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    void fill() {
        std::array<uint32_t, 4> ctr = {
            static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
            static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
        std::array<uint32_t, 2> key = key_;
        for (int r = 0; r < 10; ++r) {
            round_once(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        buffer_[0] = (static_cast<uint64_t>(ctr[1]) << 32) | ctr[0];
        buffer_[1] = (static_cast<uint64_t>(ctr[3]) << 32) | ctr[2];
        buffered_ = 2;
        ++block_;
    }

    std::array<uint32_t, 2> key_{};
    uint64_t stream_ = 0;
    uint64_t block_ = 0;
    std::array<uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

// Walker alias sampler over a finite discrete distribution. Construction is
// deterministic (stable worklists), so identical inputs give identical tables.
class AliasSampler {
  public:
    AliasSampler() = default;

    explicit AliasSampler(const std::vector<double>& weights) {
        size_t n = weights.size();
        if (n == 0) throw std::invalid_argument("AliasSampler: empty weight vector");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("AliasSampler: negative weight");
            total += w;
        }
        if (!(total > 0.0)) throw std::invalid_argument("AliasSampler: zero total weight");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
        std::vector<size_t> small, large;
        for (size_t i = n; i-- > 0;) (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            size_t s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (size_t l : large) prob_[l] = 1.0;
        for (size_t s : small) prob_[s] = 1.0;  // round-off leftovers
    }

    size_t operator()(PhiloxRng& rng) const {
        double u = rng.uniform01() * static_cast<double>(prob_.size());
        auto idx = static_cast<size_t>(u);
        if (idx >= prob_.size()) idx = prob_.size() - 1;
        double frac = u - static_cast<double>(idx);
        return frac < prob_[idx] ? idx : alias_[idx];
    }

    size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<size_t> alias_;
};

}  // namespace rrproc
