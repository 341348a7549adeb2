#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace mgeo {

/**
 * Enumeration tables for multi-indices over `nvars` variables, graded by
 * total degree: every index of degree d precedes every index of degree d+1.
 * A jet truncated at order k therefore uses exactly the first count(k)
 * positions, so a single table serves all orders up to max_order.
 *
 * The table also precomputes the convolution structure used by truncated
 * Taylor multiplication: for each target position g, conv_pairs(g) lists all
 * ordered position pairs (i, j) with index(i) + index(j) == index(g).
 */
class JetSpace {
public:
    static std::shared_ptr<const JetSpace> get(int nvars, int max_order);

    int nvars() const { return nvars_; }
    int max_order() const { return max_order_; }

    /// Number of multi-indices with total degree <= order.
    int count(int order) const { return counts_.at(static_cast<size_t>(order)); }
    int total_count() const { return static_cast<int>(degree_.size()); }

    int degree(int pos) const { return degree_[static_cast<size_t>(pos)]; }

    /// Exponent of variable v in the multi-index at `pos`.
    int exponent(int pos, int v) const {
        return idx_[static_cast<size_t>(pos) * nvars_ + v];
    }

    /// Position of a multi-index given as exponents; -1 if beyond max_order.
    int position(const std::vector<int>& alpha) const;

    /// Position of index(pos) + e_v, or -1 if that exceeds max_order.
    int shift_up(int v, int pos) const {
        return shift_up_[static_cast<size_t>(v) * total_count() + pos];
    }

    /// alpha! for the multi-index at pos (converts Taylor coeff -> derivative).
    double factorial(int pos) const { return factorial_[static_cast<size_t>(pos)]; }

    const std::vector<std::pair<int32_t, int32_t>>& conv_pairs(int pos) const {
        return conv_pairs_[static_cast<size_t>(pos)];
    }

private:
    JetSpace(int nvars, int max_order);

    uint64_t pack(const uint8_t* a) const;

    int nvars_ = 0;
    int max_order_ = 0;
    std::vector<uint8_t> idx_;   // total_count x nvars exponents
    std::vector<int> degree_;
    std::vector<int> counts_;    // counts_[k] = #indices of degree <= k
    std::vector<double> factorial_;
    std::vector<int> shift_up_;  // nvars x total_count
    std::vector<std::vector<std::pair<int32_t, int32_t>>> conv_pairs_;
    std::unordered_map<uint64_t, int> pos_of_;
};

inline uint64_t JetSpace::pack(const uint8_t* a) const {
    // max_order <= 14 fits a nibble per variable, nvars <= 16
    uint64_t key = 0;
    for (int v = 0; v < nvars_; ++v) key |= static_cast<uint64_t>(a[v]) << (4 * v);
    return key;
}

inline JetSpace::JetSpace(int nvars, int max_order)
    : nvars_(nvars), max_order_(max_order) {
    if (nvars < 1 || nvars > 12) throw std::invalid_argument("JetSpace: nvars out of range");
    if (max_order < 0 || max_order > 14) throw std::invalid_argument("JetSpace: order out of range");

    std::vector<uint8_t> cur(static_cast<size_t>(nvars), 0);
    // All compositions of degree d into nvars slots, degree by degree.
    for (int d = 0; d <= max_order; ++d) {
        std::vector<std::vector<uint8_t>> level;
        std::vector<uint8_t> a(static_cast<size_t>(nvars), 0);
        // lexicographic enumeration of compositions of d
        auto rec = [&](auto&& self, int var, int remaining) -> void {
            if (var == nvars - 1) {
                a[static_cast<size_t>(var)] = static_cast<uint8_t>(remaining);
                level.push_back(a);
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                a[static_cast<size_t>(var)] = static_cast<uint8_t>(e);
                self(self, var + 1, remaining - e);
            }
        };
        rec(rec, 0, d);
        for (const auto& ix : level) {
            int pos = total_count();
            idx_.insert(idx_.end(), ix.begin(), ix.end());
            degree_.push_back(d);
            double fact = 1.0;
            for (int v = 0; v < nvars; ++v)
                for (int t = 2; t <= ix[static_cast<size_t>(v)]; ++t) fact *= t;
            factorial_.push_back(fact);
            pos_of_[pack(ix.data())] = pos;
        }
        counts_.push_back(total_count());
    }

    const int tc = total_count();
    shift_up_.assign(static_cast<size_t>(nvars) * tc, -1);
    for (int pos = 0; pos < tc; ++pos) {
        for (int v = 0; v < nvars; ++v) {
            if (degree_[static_cast<size_t>(pos)] + 1 > max_order) continue;
            std::vector<uint8_t> a(idx_.begin() + static_cast<size_t>(pos) * nvars,
                                   idx_.begin() + static_cast<size_t>(pos + 1) * nvars);
            a[static_cast<size_t>(v)]++;
            auto it = pos_of_.find(pack(a.data()));
            shift_up_[static_cast<size_t>(v) * tc + pos] = it == pos_of_.end() ? -1 : it->second;
        }
    }

    conv_pairs_.resize(static_cast<size_t>(tc));
    for (int i = 0; i < tc; ++i) {
        for (int j = 0; j < tc; ++j) {
            if (degree_[static_cast<size_t>(i)] + degree_[static_cast<size_t>(j)] > max_order) continue;
            std::vector<uint8_t> a(static_cast<size_t>(nvars), 0);
            for (int v = 0; v < nvars; ++v)
                a[static_cast<size_t>(v)] = static_cast<uint8_t>(
                    idx_[static_cast<size_t>(i) * nvars + v] + idx_[static_cast<size_t>(j) * nvars + v]);
            conv_pairs_[static_cast<size_t>(pos_of_.at(pack(a.data())))].emplace_back(i, j);
        }
    }
}

inline int JetSpace::position(const std::vector<int>& alpha) const {
    if (static_cast<int>(alpha.size()) != nvars_) return -1;
    std::vector<uint8_t> a(static_cast<size_t>(nvars_));
    int deg = 0;
    for (int v = 0; v < nvars_; ++v) {
        if (alpha[static_cast<size_t>(v)] < 0) return -1;
        deg += alpha[static_cast<size_t>(v)];
        a[static_cast<size_t>(v)] = static_cast<uint8_t>(alpha[static_cast<size_t>(v)]);
    }
    if (deg > max_order_) return -1;
    auto it = pos_of_.find(pack(a.data()));
    return it == pos_of_.end() ? -1 : it->second;
}

inline std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int max_order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(nvars, max_order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto sp = std::shared_ptr<const JetSpace>(new JetSpace(nvars, max_order));
    cache[key] = sp;
    return sp;
}

using JetSpacePtr = std::shared_ptr<const JetSpace>;

}  // namespace mgeo
