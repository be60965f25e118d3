#pragma once

#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dynmatch/types.hpp"

namespace dynmatch {

/// Set with O(1) expected insert, erase and membership, plus O(1) uniform
/// sampling. Elements live in a dense vector; a hash map records each
/// element's slot. Erase moves the last element into the vacated slot.
///
///     IndexedSet<int> s;
///     s.insert(4); s.insert(9);
///     assert(s[s.position(9)] == 9);
template <typename T, typename Hash = std::hash<T>>
class IndexedSet {
public:
    bool insert(const T& value) {
        auto [it, fresh] = slot_.try_emplace(value, items_.size());
        if (!fresh) return false;
        items_.push_back(value);
        return true;
    }

    bool erase(const T& value) {
        auto it = slot_.find(value);
        if (it == slot_.end()) return false;
        const std::size_t hole = it->second;
        slot_.erase(it);
        if (hole + 1 != items_.size()) {
            items_[hole] = items_.back();
            slot_[items_[hole]] = hole;
        }
        items_.pop_back();
        return true;
    }

    bool contains(const T& value) const { return slot_.count(value) != 0; }

    std::size_t position(const T& value) const {
        auto it = slot_.find(value);
        if (it == slot_.end()) throw std::out_of_range("IndexedSet: value not present");
        return it->second;
    }

    const T& sample(Rng& rng) const {
        if (items_.empty()) throw std::logic_error("IndexedSet: sample from empty set");
        return items_[uniform_index(rng, items_.size())];
    }

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const T& operator[](std::size_t i) const { return items_[i]; }
    const std::vector<T>& items() const noexcept { return items_; }
    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }

    void clear() {
        items_.clear();
        slot_.clear();
    }

private:
    std::vector<T> items_;
    std::unordered_map<T, std::size_t, Hash> slot_;
};

}  // namespace dynmatch
