#include <algorithm>
#include <cstdio>
#include <queue>
#include <set>
#include <string>

#include "dendrite/front_engine.hpp"

namespace dendrite {

namespace {

struct Node {
    double tb;
    double xb;
    std::uint64_t id;
    std::uint32_t slot;
    bool positive;
};

struct Probe {
    double x;
};

double position(const Node& f, double tau, double rho)
{
    return f.positive ? f.xb - rho * (tau - f.tb) : f.xb + rho * (tau - f.tb);
}

// Positions at the engine clock. Alive fronts never cross, so the order is
// stable in time; the clock only matters for locating new impulses.
struct ByPosition {
    using is_transparent = void;
    const double* now;
    double rho;

    bool operator()(const Node& a, const Node& b) const
    {
        double pa = position(a, *now, rho);
        double pb = position(b, *now, rho);
        if (pa != pb) return pa < pb;
        if ((a.id >> 1) == (b.id >> 1)) return a.positive && !b.positive;
        return a.id < b.id;
    }
    bool operator()(const Node& a, const Probe& b) const { return position(a, *now, rho) < b.x; }
    bool operator()(const Probe& a, const Node& b) const { return a.x < position(b, *now, rho); }
};

using FrontSet = std::set<Node, ByPosition>;

struct Slot {
    FrontSet::iterator it;
    std::uint32_t gen = 0;
    bool alive = false;
    double death = 0.0;
};

struct Collision {
    double time;
    std::uint64_t key;
    std::uint32_t lower, lower_gen;
    std::uint32_t upper, upper_gen;
};

struct Later {
    bool operator()(const Collision& a, const Collision& b) const
    {
        return a.time > b.time || (a.time == b.time && a.key > b.key);
    }
};

std::string fmt(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

}  // namespace

struct StreamingEngine::State {
    double rho;
    double L;
    bool record;
    double now = 0.0;
    FrontSet fronts;
    std::vector<Slot> slots;
    std::vector<std::uint32_t> free_slots;
    std::priority_queue<Collision, std::vector<Collision>, Later> heap;
    std::uint64_t next_impulse = 0;

    std::size_t n_soma = 0, n_far = 0, n_ann = 0;
    DendriteTrace trace;

    // lowest unmatched positive front
    enum class Hit { unknown, none, known } hit_state = Hit::none;
    std::uint32_t hit_slot = 0;

    State(double rho_, double L_, bool record_) : rho(rho_), L(L_), record(record_), fronts(ByPosition{&now, rho_}) {}

    std::uint32_t take_slot()
    {
        if (!free_slots.empty()) {
            auto s = free_slots.back();
            free_slots.pop_back();
            return s;
        }
        slots.emplace_back();
        return static_cast<std::uint32_t>(slots.size() - 1);
    }

    void kill(FrontSet::iterator it, double when)
    {
        Slot& s = slots[it->slot];
        s.alive = false;
        s.death = when;
        ++s.gen;
        free_slots.push_back(it->slot);
        fronts.erase(it);
    }

    void schedule(FrontSet::iterator a, FrontSet::iterator b)
    {
        if (a->positive || !b->positive) return;
        Collision c;
        c.time = (b->xb - a->xb + rho * (a->tb + b->tb)) / (2.0 * rho);
        c.key = std::min(a->id, b->id);
        c.lower = a->slot;
        c.lower_gen = slots[a->slot].gen;
        c.upper = b->slot;
        c.upper_gen = slots[b->slot].gen;
        heap.push(c);
    }

    bool valid(const Collision& c) const
    {
        return slots[c.lower].gen == c.lower_gen && slots[c.upper].gen == c.upper_gen;
    }

    // drops stale collisions; a stale entry whose front died at the very same
    // instant means two simultaneous events shared that front
    void clean_heap()
    {
        while (!heap.empty() && !valid(heap.top())) {
            const Collision& c = heap.top();
            bool lower_same = slots[c.lower].gen == c.lower_gen + 1 && slots[c.lower].death == c.time;
            bool upper_same = slots[c.upper].gen == c.upper_gen + 1 && slots[c.upper].death == c.time;
            if (lower_same || upper_same)
                throw SimultaneousEventError("simultaneous events share a front at t=" + fmt(c.time));
            heap.pop();
        }
    }

    void scan_hit()
    {
        std::size_t depth = 0;
        for (const Node& f : fronts) {
            if (!f.positive) {
                ++depth;
            } else if (depth > 0) {
                --depth;
            } else {
                hit_state = Hit::known;
                hit_slot = f.slot;
                return;
            }
        }
        hit_state = Hit::none;
    }

    std::size_t advance(double t, std::vector<double>* hits)
    {
        std::size_t emitted = 0;
        for (;;) {
            clean_heap();
            double best_time = std::numeric_limits<double>::infinity();
            std::uint64_t best_key = std::numeric_limits<std::uint64_t>::max();
            int which = -1;  // 0 collision, 1 soma, 2 far exit
            auto consider = [&](double time, std::uint64_t key, int kind) {
                if (time < best_time || (time == best_time && key < best_key)) {
                    best_time = time;
                    best_key = key;
                    which = kind;
                }
            };
            if (!heap.empty()) consider(heap.top().time, heap.top().key, 0);
            if (!fronts.empty()) {
                const Node& lo = *fronts.begin();
                if (lo.positive) consider(lo.tb + lo.xb / rho, lo.id, 1);
                const Node& hi = *fronts.rbegin();
                if (!hi.positive) consider(hi.tb + (L - hi.xb) / rho, hi.id, 2);
            }
            if (which < 0 || best_time > t) break;
            now = std::max(now, best_time);

            if (which == 0) {
                Collision c = heap.top();
                heap.pop();
                auto a = slots[c.lower].it;
                auto b = slots[c.upper].it;
                double x = (b->xb + a->xb + rho * (b->tb - a->tb)) / 2.0;
                ++n_ann;
                if (record) {
                    trace.annihilations.push_back({c.time, x, a->id, b->id});
                    trace.events.push_back({c.time, FrontEventKind::annihilation, x, a->id, b->id});
                }
                auto below = a;
                auto above = std::next(b);
                bool has_below = a != fronts.begin();
                if (has_below) --below;
                kill(a, c.time);
                kill(b, c.time);
                if (has_below && above != fronts.end()) schedule(below, above);
            } else if (which == 1) {
                auto f = fronts.begin();
                ++n_soma;
                ++emitted;
                if (hits) hits->push_back(best_time);
                if (record) {
                    trace.soma_hits.push_back(best_time);
                    trace.events.push_back({best_time, FrontEventKind::soma_hit, 0.0, f->id, f->id});
                }
                if (hit_state == Hit::known && hit_slot == f->slot) hit_state = Hit::unknown;
                kill(f, best_time);
            } else {
                auto f = std::prev(fronts.end());
                ++n_far;
                if (record) {
                    trace.far_exits.push_back(best_time);
                    trace.events.push_back({best_time, FrontEventKind::far_exit, L, f->id, f->id});
                }
                kill(f, best_time);
            }
        }
        if (t > now) now = t;
        return emitted;
    }

    void push(double t, double x)
    {
        if (!(t >= now)) throw std::invalid_argument("push_impulse: time " + fmt(t) + " precedes engine time " + fmt(now));
        if (!(x >= 0.0 && x <= L)) throw std::invalid_argument("push_impulse: position " + fmt(x) + " outside [0, L]");
        advance(t, nullptr);
        now = t;

        auto above = fronts.lower_bound(Probe{x});
        if (above != fronts.end() && position(*above, now, rho) == x)
            throw SimultaneousEventError("impulse at t=" + fmt(t) + " born on an existing front");

        std::uint64_t k = next_impulse++;
        std::uint32_t sp = take_slot();
        std::uint32_t sn = take_slot();
        auto neg = fronts.emplace_hint(above, Node{t, x, negative_front_id(k), sn, false});
        auto pos = fronts.emplace_hint(neg, Node{t, x, positive_front_id(k), sp, true});
        slots[sp].it = pos;
        slots[sp].alive = true;
        slots[sn].it = neg;
        slots[sn].alive = true;
        if (record) trace.events.push_back({t, FrontEventKind::birth, x, positive_front_id(k), negative_front_id(k)});

        if (pos != fronts.begin()) schedule(std::prev(pos), pos);
        if (above != fronts.end()) schedule(neg, above);

        // a new positive front can only become the next soma hit if it lies
        // below the current one
        bool below_current = hit_state != Hit::known || x < position(*slots[hit_slot].it, now, rho);
        if (hit_state == Hit::unknown) return;
        if (below_current) {
            long depth = 0;
            for (auto it = fronts.begin(); it != pos; ++it) depth = it->positive ? std::max(0L, depth - 1) : depth + 1;
            if (depth == 0) {
                hit_state = Hit::known;
                hit_slot = sp;
            }
        }
    }
};

StreamingEngine::StreamingEngine(double rho, double L, bool record_events)
    : s_(std::make_unique<State>(rho, L, record_events))
{
    if (!(rho > 0.0) || !(L > 0.0)) throw std::invalid_argument("StreamingEngine: rho and L must be positive");
}

StreamingEngine::~StreamingEngine() = default;
StreamingEngine::StreamingEngine(StreamingEngine&&) noexcept = default;
StreamingEngine& StreamingEngine::operator=(StreamingEngine&&) noexcept = default;

void StreamingEngine::push_impulse(double t, double x) { s_->push(t, x); }

std::size_t StreamingEngine::advance_to(double t, std::vector<double>* hits)
{
    if (!(t >= s_->now)) throw std::invalid_argument("advance_to: time " + fmt(t) + " precedes engine time");
    return s_->advance(t, hits);
}

double StreamingEngine::next_soma_hit()
{
    if (s_->hit_state == State::Hit::unknown) s_->scan_hit();
    if (s_->hit_state == State::Hit::none) return std::numeric_limits<double>::infinity();
    const Node& f = *s_->slots[s_->hit_slot].it;
    return f.tb + f.xb / s_->rho;
}

double StreamingEngine::now() const { return s_->now; }
std::size_t StreamingEngine::alive() const { return s_->fronts.size(); }
std::size_t StreamingEngine::impulse_count() const { return s_->next_impulse; }
std::size_t StreamingEngine::soma_hit_count() const { return s_->n_soma; }
std::size_t StreamingEngine::far_exit_count() const { return s_->n_far; }
std::size_t StreamingEngine::annihilation_count() const { return s_->n_ann; }

bool StreamingEngine::conserved() const
{
    return 2 * s_->next_impulse == 2 * s_->n_ann + s_->n_soma + s_->n_far + s_->fronts.size();
}

DendriteTrace StreamingEngine::take_trace()
{
    DendriteTrace out = std::move(s_->trace);
    s_->trace = DendriteTrace{};
    out.impulse_count = s_->next_impulse;
    out.alive = s_->fronts.size();
    return out;
}

}  // namespace dendrite
