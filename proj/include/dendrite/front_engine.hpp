#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dendrite/cone_order.hpp"

namespace dendrite {

/// Impulse k spawns the positive front 2k (toward the soma) and the negative front 2k + 1.
inline std::uint64_t positive_front_id(std::uint64_t impulse) { return 2 * impulse; }
inline std::uint64_t negative_front_id(std::uint64_t impulse) { return 2 * impulse + 1; }
inline bool is_positive_front(std::uint64_t id) { return (id & 1u) == 0; }

enum class FrontEventKind { birth, soma_hit, far_exit, annihilation };

const char* to_string(FrontEventKind kind);

struct FrontEvent {
    double time = 0.0;
    FrontEventKind kind = FrontEventKind::birth;
    double x = 0.0;
    /// birth: the positive front; annihilation: the negative (lower) front.
    std::uint64_t front_id = 0;
    /// annihilation: the positive (upper) front; otherwise equal to front_id.
    std::uint64_t other_id = 0;

    friend bool operator==(const FrontEvent&, const FrontEvent&) = default;
};

struct Annihilation {
    double time = 0.0;
    double x = 0.0;
    std::uint64_t negative_id = 0;
    std::uint64_t positive_id = 0;
};

/// Event log of one dendrite.
struct DendriteTrace {
    std::vector<double> soma_hits;
    std::vector<double> far_exits;
    std::vector<Annihilation> annihilations;
    std::size_t impulse_count = 0;
    std::size_t alive = 0;
    /// Full log in processing order (only filled when recording).
    std::vector<FrontEvent> events;

    /// 2 impulses = 2 annihilations + soma hits + far exits + alive fronts.
    bool conserved() const
    {
        return 2 * impulse_count == 2 * annihilations.size() + soma_hits.size() + far_exits.size() + alive;
    }
    std::size_t hits_before(double t) const;
};

/// Raised on two simultaneous events sharing a front, or an impulse born on an existing front.
class SimultaneousEventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Batch simulation of all fronts generated by the cloud, up to and including the horizon.
DendriteTrace simulate_fronts(const PointCloud& cloud, double horizon);

/// Causal engine: impulses are pushed in time order, events are emitted on demand.
class StreamingEngine {
public:
    StreamingEngine(double rho, double L, bool record_events = false);
    ~StreamingEngine();
    StreamingEngine(StreamingEngine&&) noexcept;
    StreamingEngine& operator=(StreamingEngine&&) noexcept;

    /// Processes every event at or before t, then adds the two fronts of (t, x).
    /// Throws std::invalid_argument if t < now() or x outside [0, L].
    void push_impulse(double t, double x);

    /// Processes every event with time <= t. Returns the number of soma hits emitted;
    /// their times are appended to hits when given.
    std::size_t advance_to(double t, std::vector<double>* hits = nullptr);

    /// Time of the next soma hit if no further impulse arrives, +inf if none.
    double next_soma_hit();

    double now() const;
    std::size_t alive() const;
    std::size_t impulse_count() const;
    std::size_t soma_hit_count() const;
    std::size_t far_exit_count() const;
    std::size_t annihilation_count() const;
    /// 2 impulses = 2 annihilations + soma hits + far exits + alive fronts.
    bool conserved() const;

    /// Recorded trace (event lists are empty unless recording). Clears the lists.
    DendriteTrace take_trace();

private:
    struct State;
    std::unique_ptr<State> s_;
};

/// Replays a cloud through the streaming engine up to the horizon.
DendriteTrace stream_fronts(const PointCloud& cloud, double horizon);

/// CSV with header `time,kind,x,front_id`.
void write_trace_csv(std::ostream& out, const DendriteTrace& trace);

}  // namespace dendrite
