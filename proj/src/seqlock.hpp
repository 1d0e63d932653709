#pragma once

#include <array>
#include <atomic>
#include <cstdint>

namespace afll {

// Single-writer snapshot cell. Readers never block the writer and always
// see a complete snapshot (retry on a torn read). T must be trivially
// copyable and is stored field-wise through relaxed atomics.
template <typename T>
class SnapshotCell {
    static_assert(std::is_trivially_copyable_v<T>);

public:
    SnapshotCell() = default;
    explicit SnapshotCell(const T& initial) { store(initial); }

    void store(const T& value) {
        const std::uint64_t s = seq_.load(std::memory_order_relaxed);
        seq_.store(s + 1, std::memory_order_release); // odd: write in progress
        copy_out(value);
        seq_.store(s + 2, std::memory_order_release);
    }

    T load() const {
        T out;
        for (;;) {
            const std::uint64_t s1 = seq_.load(std::memory_order_acquire);
            if (s1 & 1) continue;
            copy_in(out);
            std::atomic_thread_fence(std::memory_order_acquire);
            const std::uint64_t s2 = seq_.load(std::memory_order_relaxed);
            if (s1 == s2) return out;
        }
    }

private:
    static constexpr std::size_t kWords = (sizeof(T) + 7) / 8;

    void copy_out(const T& value) {
        std::uint64_t raw[kWords] = {};
        __builtin_memcpy(raw, &value, sizeof(T));
        for (std::size_t i = 0; i < kWords; ++i)
            words_[i].store(raw[i], std::memory_order_relaxed);
    }

    void copy_in(T& out) const {
        std::uint64_t raw[kWords];
        for (std::size_t i = 0; i < kWords; ++i)
            raw[i] = words_[i].load(std::memory_order_relaxed);
        __builtin_memcpy(&out, raw, sizeof(T));
    }

    std::atomic<std::uint64_t> seq_{0};
    mutable std::array<std::atomic<std::uint64_t>, kWords> words_{};
};

} // namespace afll
