#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace fantomette {

/// Growable bit set over dense indices. Operands of different lengths are
/// treated as zero-extended.
class IndexSet {
public:
    IndexSet() = default;
    explicit IndexSet(std::size_t bits) : words_((bits + 63) / 64, 0) {}

    void set(std::size_t i) {
        if (i / 64 >= words_.size()) words_.resize(i / 64 + 1, 0);
        words_[i / 64] |= (std::uint64_t{1} << (i % 64));
    }
    void reset(std::size_t i) {
        if (i / 64 < words_.size()) words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    }
    bool test(std::size_t i) const {
        return i / 64 < words_.size() && ((words_[i / 64] >> (i % 64)) & 1u) != 0;
    }

    IndexSet& operator|=(const IndexSet& o) {
        if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
        for (std::size_t w = 0; w < o.words_.size(); ++w) words_[w] |= o.words_[w];
        return *this;
    }
    IndexSet& operator&=(const IndexSet& o) {
        if (words_.size() > o.words_.size()) words_.resize(o.words_.size());
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
        return *this;
    }
    /// this &= ~o
    IndexSet& subtract(const IndexSet& o) {
        const std::size_t n = std::min(words_.size(), o.words_.size());
        for (std::size_t w = 0; w < n; ++w) words_[w] &= ~o.words_[w];
        return *this;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool any() const {
        for (auto w : words_) {
            if (w != 0) return true;
        }
        return false;
    }
    bool intersects(const IndexSet& o) const {
        const std::size_t n = std::min(words_.size(), o.words_.size());
        for (std::size_t w = 0; w < n; ++w) {
            if ((words_[w] & o.words_[w]) != 0) return true;
        }
        return false;
    }
    std::size_t intersect_count(const IndexSet& o) const {
        const std::size_t n = std::min(words_.size(), o.words_.size());
        std::size_t c = 0;
        for (std::size_t w = 0; w < n; ++w) c += static_cast<std::size_t>(std::popcount(words_[w] & o.words_[w]));
        return c;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                fn(w * 64 + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
    }

    std::vector<std::size_t> to_vector() const {
        std::vector<std::size_t> out;
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    /// Drops every index >= bits.
    void truncate(std::size_t bits) {
        words_.resize((bits + 63) / 64);
        if (bits % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
    }

    friend bool operator==(const IndexSet& a, const IndexSet& b) {
        const std::size_t n = std::max(a.words_.size(), b.words_.size());
        for (std::size_t w = 0; w < n; ++w) {
            const std::uint64_t x = w < a.words_.size() ? a.words_[w] : 0;
            const std::uint64_t y = w < b.words_.size() ? b.words_[w] : 0;
            if (x != y) return false;
        }
        return true;
    }

private:
    std::vector<std::uint64_t> words_;
};

}  // namespace fantomette
