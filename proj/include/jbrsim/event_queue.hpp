#pragma once

#include "jbrsim/errors.hpp"

#include <cstdint>
#include <optional>
#include <queue>
#include <unordered_set>
#include <utility>
#include <vector>

namespace jbrsim {

// Time-ordered event queue. Ties dequeue in insertion order (sequence number),
// which is what makes runs reproducible. Cancellation is lazy: a heap entry
// whose handle is no longer live is skipped on pop.
template <class T>
class EventQueue {
public:
    using Handle = std::uint64_t;

    struct Entry {
        double fire_time;
        Handle sequence;
        T payload;
    };

    [[nodiscard]] double now() const { return now_; }
    [[nodiscard]] bool empty() const { return live_.empty(); }
    [[nodiscard]] std::size_t pending() const { return live_.size(); }

    Handle schedule(double fire_time, T payload) {
        if (fire_time < now_) {
            throw InvariantViolation("event scheduled in the past");
        }
        const Handle h = next_sequence_++;
        heap_.push(Entry{fire_time, h, std::move(payload)});
        live_.insert(h);
        return h;
    }

    // Returns false if the handle already fired or was cancelled before.
    bool cancel(Handle h) { return live_.erase(h) != 0; }

    // Pops the next live event with fire_time <= t_limit, advancing the clock
    // to its fire time. Returns nullopt (clock untouched) otherwise.
    std::optional<Entry> pop_next(double t_limit) {
        skip_dead();
        if (heap_.empty() || heap_.top().fire_time > t_limit) {
            return std::nullopt;
        }
        Entry e = heap_.top();
        heap_.pop();
        live_.erase(e.sequence);
        now_ = e.fire_time;
        return e;
    }

    void advance_to(double t) {
        if (t >= now_) now_ = t;
    }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
            return a.sequence > b.sequence;
        }
    };

    void skip_dead() {
        while (!heap_.empty() && !live_.count(heap_.top().sequence)) {
            heap_.pop();
        }
    }

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::unordered_set<Handle> live_;
    Handle next_sequence_ = 0;
    double now_ = 0.0;
};

} // namespace jbrsim
