#include "dendrite/front_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace dendrite {

namespace {

struct BatchFront {
    std::uint64_t id;
    double tb;
    double xb;
    bool positive;
};

struct Candidate {
    double time = std::numeric_limits<double>::infinity();
    std::uint64_t key = std::numeric_limits<std::uint64_t>::max();
    FrontEventKind kind = FrontEventKind::birth;
    std::size_t lower = 0;  // index in the alive list
    std::size_t upper = 0;

    bool before(const Candidate& o) const { return time < o.time || (time == o.time && key < o.key); }
};

double position(const BatchFront& f, double tau, double rho)
{
    return f.positive ? f.xb - rho * (tau - f.tb) : f.xb + rho * (tau - f.tb);
}

std::string fmt_time(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

}  // namespace

const char* to_string(FrontEventKind kind)
{
    switch (kind) {
    case FrontEventKind::birth: return "birth";
    case FrontEventKind::soma_hit: return "soma_hit";
    case FrontEventKind::far_exit: return "far_exit";
    case FrontEventKind::annihilation: return "annihilation";
    }
    return "?";
}

std::size_t DendriteTrace::hits_before(double t) const
{
    return static_cast<std::size_t>(std::upper_bound(soma_hits.begin(), soma_hits.end(), t) - soma_hits.begin());
}

DendriteTrace simulate_fronts(const PointCloud& cloud, double horizon)
{
    if (!(horizon >= 0.0)) throw std::invalid_argument("simulate_fronts: horizon must be >= 0");
    const double rho = cloud.rho();
    const double L = cloud.L();
    DendriteTrace tr;
    std::vector<BatchFront> alive;  // sorted by position
    std::size_t next = 0;

    for (;;) {
        // every candidate; the earliest one is always a genuine event
        Candidate best;
        std::vector<Candidate> all;
        for (std::size_t i = 0; i < alive.size(); ++i) {
            const auto& f = alive[i];
            Candidate c;
            c.lower = c.upper = i;
            c.key = f.id;
            if (f.positive) {
                c.time = f.tb + f.xb / rho;
                c.kind = FrontEventKind::soma_hit;
            } else {
                c.time = f.tb + (L - f.xb) / rho;
                c.kind = FrontEventKind::far_exit;
            }
            all.push_back(c);
            if (i + 1 < alive.size() && !f.positive && alive[i + 1].positive) {
                const auto& a = f;
                const auto& b = alive[i + 1];
                Candidate k;
                k.time = (b.xb - a.xb + rho * (a.tb + b.tb)) / (2.0 * rho);
                k.key = std::min(a.id, b.id);
                k.kind = FrontEventKind::annihilation;
                k.lower = i;
                k.upper = i + 1;
                all.push_back(k);
            }
        }
        for (const auto& c : all)
            if (c.before(best)) best = c;
        for (const auto& c : all) {
            if (c.time != best.time) continue;
            if (c.kind == best.kind && c.lower == best.lower && c.upper == best.upper) continue;
            bool shared = c.lower == best.lower || c.lower == best.upper || c.upper == best.lower || c.upper == best.upper;
            if (shared) throw SimultaneousEventError("simultaneous events share a front at t=" + fmt_time(best.time));
        }

        double impulse_time = next < cloud.size() ? cloud[next].t : std::numeric_limits<double>::infinity();
        if (best.time <= impulse_time && best.time <= horizon) {
            if (best.kind == FrontEventKind::annihilation) {
                const auto& a = alive[best.lower];
                const auto& b = alive[best.upper];
                double x = (b.xb + a.xb + rho * (b.tb - a.tb)) / 2.0;
                tr.annihilations.push_back({best.time, x, a.id, b.id});
                tr.events.push_back({best.time, FrontEventKind::annihilation, x, a.id, b.id});
                alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best.lower),
                            alive.begin() + static_cast<std::ptrdiff_t>(best.upper) + 1);
            } else {
                const auto& f = alive[best.lower];
                if (best.kind == FrontEventKind::soma_hit) {
                    tr.soma_hits.push_back(best.time);
                    tr.events.push_back({best.time, best.kind, 0.0, f.id, f.id});
                } else {
                    tr.far_exits.push_back(best.time);
                    tr.events.push_back({best.time, best.kind, L, f.id, f.id});
                }
                alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best.lower));
            }
            continue;
        }
        if (impulse_time <= horizon) {
            const Impulse& p = cloud[next];
            std::uint64_t k = next++;
            auto at = std::find_if(alive.begin(), alive.end(),
                                   [&](const BatchFront& f) { return position(f, p.t, rho) >= p.x; });
            if (at != alive.end() && position(*at, p.t, rho) == p.x)
                throw SimultaneousEventError("impulse at t=" + fmt_time(p.t) + " born on an existing front");
            at = alive.insert(at, BatchFront{negative_front_id(k), p.t, p.x, false});
            alive.insert(at, BatchFront{positive_front_id(k), p.t, p.x, true});
            ++tr.impulse_count;
            tr.events.push_back({p.t, FrontEventKind::birth, p.x, positive_front_id(k), negative_front_id(k)});
            continue;
        }
        break;
    }
    tr.alive = alive.size();
    return tr;
}

DendriteTrace stream_fronts(const PointCloud& cloud, double horizon)
{
    StreamingEngine eng(cloud.rho(), cloud.L(), true);
    for (const auto& p : cloud.impulses()) {
        if (p.t > horizon) break;
        eng.push_impulse(p.t, p.x);
    }
    eng.advance_to(horizon);
    return eng.take_trace();
}

void write_trace_csv(std::ostream& out, const DendriteTrace& trace)
{
    char buf[128];
    out << "time,kind,x,front_id\n";
    for (const auto& e : trace.events) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%llu\n", e.time, to_string(e.kind), e.x,
                      static_cast<unsigned long long>(e.front_id));
        out << buf;
        if (e.kind == FrontEventKind::annihilation || e.kind == FrontEventKind::birth) {
            std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%llu\n", e.time, to_string(e.kind), e.x,
                          static_cast<unsigned long long>(e.other_id));
            out << buf;
        }
    }
}

}  // namespace dendrite
