#include "dendrite/particle_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <boost/random/exponential_distribution.hpp>

#include "dendrite/front_engine.hpp"

namespace dendrite {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum : std::uint32_t { kNeuron = 0, kArrival = 1, kStreamStart = 2, kDendriteHit = 3, kSample = 4 };

struct Entry {
    double time;
    /// kind in the top 3 bits, then the index
    std::uint32_t key;
    /// version tag, or the target dendrite of an arrival
    std::uint32_t aux;

    std::uint32_t kind() const { return key >> 29; }
    std::uint32_t index() const { return key & ((1u << 29) - 1); }
};

inline Entry entry(double time, std::uint32_t kind, std::size_t index, std::uint32_t aux)
{
    return {time, (kind << 29) | static_cast<std::uint32_t>(index), aux};
}

inline bool before(const Entry& a, const Entry& b) { return a.time < b.time || (a.time == b.time && a.key < b.key); }

// 4-ary min-heap with an in-place replacement of the top.
class EventHeap {
public:
    bool empty() const { return h_.empty(); }
    const Entry& top() const { return h_.front(); }
    std::size_t size() const { return h_.size(); }

    void push(const Entry& e)
    {
        h_.push_back(e);
        std::size_t i = h_.size() - 1;
        while (i > 0) {
            std::size_t parent = (i - 1) / 4;
            if (!before(e, h_[parent])) break;
            h_[i] = h_[parent];
            i = parent;
        }
        h_[i] = e;
    }

    void pop()
    {
        Entry last = h_.back();
        h_.pop_back();
        if (!h_.empty()) sift_down(last);
    }

    void replace_top(const Entry& e) { sift_down(e); }

private:
    void sift_down(const Entry& e)
    {
        const std::size_t n = h_.size();
        std::size_t i = 0;
        for (;;) {
            std::size_t c = 4 * i + 1;
            if (c >= n) break;
            std::size_t best = c, end = std::min(c + 4, n);
            for (std::size_t k = c + 1; k < end; ++k)
                if (before(h_[k], h_[best])) best = k;
            if (!before(h_[best], e)) break;
            h_[i] = h_[best];
            i = best;
        }
        h_[i] = e;
    }

    std::vector<Entry> h_;
};

// Calendar queue: a ring of buckets of width w covering the near future, a heap beyond it.
// The current bucket is kept sorted in decreasing order so its minimum is at the back.
class EventQueue {
public:
    EventQueue(double width, std::size_t ring_bits) : w_(width), ring_(std::size_t{1} << ring_bits)
    {
        mask_ = ring_.size() - 1;
    }

    bool empty() const { return count_ == 0; }

    const Entry& top()
    {
        while (cur_.empty()) advance();
        return cur_.back();
    }

    void pop()
    {
        cur_.pop_back();
        --count_;
    }

    void push(const Entry& e)
    {
        ++count_;
        std::int64_t b = bucket(e.time);
        if (b <= base_) {
            auto it = cur_.end();
            while (it != cur_.begin() && before(*(it - 1), e)) --it;
            cur_.insert(it, e);
        } else if (b < base_ + static_cast<std::int64_t>(ring_.size())) {
            ring_[static_cast<std::size_t>(b) & mask_].push_back(e);
            ++in_ring_;
        } else {
            far_.push(e);
        }
    }

private:
    std::int64_t bucket(double t) const { return static_cast<std::int64_t>(std::floor(t / w_)); }

    void advance()
    {
        if (in_ring_ == 0) {
            // nothing near: jump to the first far event
            base_ = std::max(base_ + 1, bucket(far_.top().time));
        } else {
            ++base_;
        }
        auto& slot = ring_[static_cast<std::size_t>(base_) & mask_];
        in_ring_ -= slot.size();
        cur_.swap(slot);
        slot.clear();
        const std::int64_t horizon = base_ + static_cast<std::int64_t>(ring_.size());
        while (!far_.empty() && bucket(far_.top().time) < horizon) {
            Entry e = far_.top();
            far_.pop();
            std::int64_t b = bucket(e.time);
            if (b <= base_) {
                cur_.push_back(e);
            } else {
                ring_[static_cast<std::size_t>(b) & mask_].push_back(e);
                ++in_ring_;
            }
        }
        std::sort(cur_.begin(), cur_.end(), [](const Entry& a, const Entry& b) { return before(b, a); });
    }

    double w_;
    std::vector<std::vector<Entry>> ring_;
    std::size_t mask_ = 0;
    std::vector<Entry> cur_;
    EventHeap far_;
    std::int64_t base_ = -1;
    std::size_t count_ = 0;
    std::size_t in_ring_ = 0;
};

// V' = F(V) between events.
struct Drift {
    FunctionSpec F;
    bool affine = false;
    double c0 = 0.0, c1 = 0.0;
    double growth_C = 1.0;
    double v_min = 0.0;
    double dt_ode = 1e-3;

    Drift(const SoftParams& p, double dt) : F(p.F), growth_C(p.growth_C), v_min(p.v_min), dt_ode(dt)
    {
        affine = p.F.affine_coefficients(c0, c1);
    }

    double flow(double V, double s) const
    {
        if (s <= 0.0) return V;
        if (affine) {
            if (c1 == 0.0) return V + c0 * s;
            return V + (c0 + c1 * V) * std::expm1(c1 * s) / c1;
        }
        auto steps = static_cast<long>(std::ceil(s / dt_ode));
        double h = s / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) {
            double k1 = F(V), k2 = F(V + 0.5 * h * k1), k3 = F(V + 0.5 * h * k2), k4 = F(V + h * k3);
            V += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        }
        return std::max(V, v_min);
    }

    // upper bound of V over [0, s] without kicks
    double reach(double V, double s) const
    {
        if (affine) return std::max(V, flow(V, s));
        return v_min - 1.0 + (1.0 + V - v_min) * std::exp(growth_C * s);
    }
};

struct Stream {
    double birth = 0.0;
    NetworkTopology::Cursor cursor;
};

// Shared machinery of both models: spike streams, dendrites, samples.
class Network {
public:
    Network(const NetworkTopology& topo, const NetworkOptions& opt, double rho, double T, double v_min, double w_n)
        : topo_(topo),
          opt_(opt),
          rho_(rho),
          T_(T),
          n_(static_cast<std::size_t>(topo.n())),
          // about one arrival per bucket at a rate of n N impulses per unit time
          heap_(1.0 / (static_cast<double>(topo.n()) * std::max(1.0, static_cast<double>(topo.n()) * topo.p_n())), 16)
    {
        if (opt.samples > 0) {
            if (!(opt.sample_dt > 0.0) || opt.sample_t0 < 0.0 ||
                opt.sample_t0 + opt.sample_dt * static_cast<double>(opt.samples - 1) > T * (1 + 1e-12))
                throw std::invalid_argument("network: sample grid must lie inside [0, T]");
        }
        tr.n = topo.n();
        tr.T = T;
        tr.v_min = v_min;
        tr.w_n = w_n;
        tr.spikes.resize(n_);
        tr.excitations.resize(n_);
        tr.sample_t0 = opt.sample_t0;
        tr.sample_dt = opt.sample_dt;
        tr.samples = opt.samples;
        if (opt.record_potentials) tr.potentials.resize(opt.samples * n_);
        tr.excitation_counts.resize(opt.samples * n_);
        record_slot_.assign(n_, -1);
        for (auto j : opt.record_dendrites) {
            if (j < 0 || j >= topo.n()) throw std::invalid_argument("network: recorded dendrite out of range");
            record_slot_[static_cast<std::size_t>(j)] = static_cast<int>(tr.recorded_dendrites.size());
            tr.recorded_dendrites.push_back(j);
        }
        tr.recorded_impulses.resize(tr.recorded_dendrites.size());
        if (opt.solver == DendriteSolver::piles)
            piles_.resize(n_);
        else {
            for (std::size_t j = 0; j < n_; ++j) engines_.emplace_back(rho, topo.L());
            engine_version_.assign(n_, 0);
        }
        for (std::size_t k = 0; k < opt.samples; ++k)
            heap_.push(entry(tr.sample_time(k), kSample, k, 0));
    }

    // Impulses of a spike at tau start at tau + theta.
    void spike(std::size_t i, double birth)
    {
        if (birth > T_) return;
        auto cur = topo_.edges_from(static_cast<std::int64_t>(i));
        if (cur.done()) return;
        if (opt_.solver == DendriteSolver::fronts) {
            std::uint32_t id = alloc_stream(birth, cur);
            heap_.push(entry(birth, kStreamStart, id, 0));
            return;
        }
        std::uint32_t id = alloc_stream(birth, cur);
        heap_.push(entry(birth + cur.x() / rho_, kArrival, id, static_cast<std::uint32_t>(cur.target())));
    }

    // Runs the loop; on_neuron(i, tag, t) and on_hit(j, t) are model callbacks.
    template <class OnNeuron, class OnHit, class OnSample>
    void run(OnNeuron&& on_neuron, OnHit&& on_hit, OnSample&& on_sample)
    {
        while (!heap_.empty()) {
            Entry e = heap_.top();
            if (e.time > T_) break;
            if (++tr.events > opt_.max_events) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "network: more than %llu events by t=%.6g (explosion guard)",
                              static_cast<unsigned long long>(opt_.max_events), e.time);
                throw std::runtime_error(buf);
            }
            switch (e.kind()) {
            case kNeuron:
                heap_.pop();
                on_neuron(e.index(), e.aux, e.time);
                break;
            case kSample:
                heap_.pop();
                on_sample(e.index(), e.time);
                break;
            case kArrival: {
                const std::size_t j = e.aux;
                auto& pile = piles_[j];
                // the pile is searched after the heap update; start loading it now
                if (!pile.empty()) {
                    const double* d = pile.data();
                    std::size_t m = pile.size();
                    __builtin_prefetch(d + m / 2);
                    __builtin_prefetch(d + m / 4);
                    __builtin_prefetch(d + 3 * m / 4);
                }
                Stream& s = streams_[e.index()];
                double x = s.cursor.x();
                double birth = s.birth;
                s.cursor.next();
                heap_.pop();
                if (s.cursor.done()) {
                    free_.push_back(e.index());
                } else {
                    heap_.push(entry(birth + s.cursor.x() / rho_, kArrival, e.index(),
                                            static_cast<std::uint32_t>(s.cursor.target())));
                }
                ++tr.impulses;
                if (record_slot_[j] >= 0) tr.recorded_impulses[static_cast<std::size_t>(record_slot_[j])].push_back({birth, x});
                // positive front reaches the soma: the chain grows iff u exceeds every pile top
                double u = rho_ * birth - x;
                auto it = std::upper_bound(pile.begin(), pile.end(), u);
                if (it == pile.end()) {
                    pile.push_back(u);
                    hit(j, e.time, on_hit);
                } else {
                    *it = u;
                }
                break;
            }
            case kStreamStart: {
                heap_.pop();
                Stream s = streams_[e.index()];
                free_.push_back(e.index());
                for (auto cur = s.cursor; !cur.done(); cur.next()) {
                    auto j = static_cast<std::size_t>(cur.target());
                    // a hit due exactly at the birth time would otherwise be consumed by push_impulse
                    scratch_.clear();
                    engines_[j].advance_to(s.birth, &scratch_);
                    for (double h : scratch_) hit(j, h, on_hit);
                    engines_[j].push_impulse(s.birth, cur.x());
                    ++tr.impulses;
                    if (record_slot_[j] >= 0)
                        tr.recorded_impulses[static_cast<std::size_t>(record_slot_[j])].push_back({s.birth, cur.x()});
                    schedule_engine(j);
                }
                break;
            }
            case kDendriteHit: {
                heap_.pop();
                const std::size_t j = e.index();
                if (e.aux != engine_version_[j]) break;
                scratch_.clear();
                engines_[j].advance_to(e.time, &scratch_);
                for (double h : scratch_) hit(j, h, on_hit);
                schedule_engine(j);
                break;
            }
            }
        }
    }

    void schedule_neuron(std::size_t i, double t, std::uint32_t tag)
    {
        if (t <= T_) heap_.push(entry(t, kNeuron, i, tag));
    }

    void sample_counts(std::size_t k)
    {
        auto* row = tr.excitation_counts.data() + k * n_;
        for (std::size_t i = 0; i < n_; ++i) row[i] = static_cast<std::uint32_t>(tr.excitations[i].size());
    }

    NetworkTrace tr;

private:
    template <class OnHit>
    void hit(std::size_t j, double t, OnHit& on_hit)
    {
        ++tr.soma_hits;
        tr.excitations[j].push_back(t);
        on_hit(j, t);
    }

    void schedule_engine(std::size_t j)
    {
        ++engine_version_[j];
        double h = engines_[j].next_soma_hit();
        if (h <= T_) heap_.push(entry(h, kDendriteHit, j, engine_version_[j]));
    }

    std::uint32_t alloc_stream(double birth, const NetworkTopology::Cursor& cur)
    {
        if (!free_.empty()) {
            std::uint32_t id = free_.back();
            free_.pop_back();
            streams_[id] = {birth, cur};
            return id;
        }
        streams_.push_back({birth, cur});
        return static_cast<std::uint32_t>(streams_.size() - 1);
    }

    const NetworkTopology& topo_;
    const NetworkOptions& opt_;
    double rho_;
    double T_;
    std::size_t n_;
    EventQueue heap_;
    std::vector<Stream> streams_;
    std::vector<std::uint32_t> free_;
    std::vector<std::vector<double>> piles_;
    std::vector<StreamingEngine> engines_;
    std::vector<std::uint32_t> engine_version_;
    std::vector<int> record_slot_;
    std::vector<double> scratch_;
};

void check_network(const NetworkParams& net, const NetworkTopology& topo, double model_w, double T)
{
    auto rep = validate_network(net);
    if (!rep.ok()) throw std::invalid_argument("network: " + rep.errors.front());
    if (topo.n() != net.n || topo.p_n() != net.p_n || topo.self_edges() != net.self_edges)
        throw std::invalid_argument("network: topology does not match the network parameters");
    if (model_w != net.w) throw std::invalid_argument("network: model w and network w differ");
    if (!(T > 0.0)) throw std::invalid_argument("network: T > 0 required");
}

}  // namespace

// ---------------------------------------------------------------------------
// topology

NetworkTopology::NetworkTopology(std::int64_t n, double p_n, const FunctionSpec& H, double L, std::uint64_t seed,
                                 bool self_edges)
    : n_(n), p_n_(p_n), L_(L), seed_(seed), self_edges_(self_edges), H_(Law::density(H, 0.0, L))
{
    if (n < 1) throw std::invalid_argument("sample_topology: n >= 1 required");
    if (!(p_n > 0.0 && p_n <= 1.0)) throw std::invalid_argument("sample_topology: p_n in (0, 1] required");
    if (n >= std::int64_t{1} << 29) throw std::invalid_argument("sample_topology: n too large");
    const std::int64_t m = self_edges ? n : n - 1;
    affine_H_ = H.affine_coefficients(h0_, h1_) && h0_ > 0.0 && h0_ + h1_ * L >= 0.0 &&
                std::abs(h0_ * L + 0.5 * h1_ * L * L - 1.0) <= 1e-12;
    const std::uint64_t deg_seed = derive_seed(seed, 1), perm_seed = derive_seed(seed, 2);
    degree_.resize(static_cast<std::size_t>(n));
    perm_.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t d = m;
        if (p_n < 1.0 && m > 0) {
            SplitMix g(hash_key(deg_seed, static_cast<std::uint64_t>(i)));
            d = std::binomial_distribution<std::int64_t>(m, p_n)(g);
        }
        degree_[static_cast<std::size_t>(i)] = d;
        edge_count_ += d;
        perm_.emplace_back(static_cast<std::uint64_t>(std::max<std::int64_t>(m, 0)),
                           hash_key(perm_seed, static_cast<std::uint64_t>(i)));
    }
}

double NetworkTopology::quantile(double u) const
{
    if (!affine_H_) return H_(u);
    // h0 x + h1 x^2 / 2 = u, rationalized
    double x = 2.0 * u / (h0_ + std::sqrt(std::max(0.0, h0_ * h0_ + 2.0 * h1_ * u)));
    return std::min(x, L_);
}

std::int64_t NetworkTopology::target_of(std::int64_t i, std::int64_t rank) const
{
    auto j = static_cast<std::int64_t>(perm_[static_cast<std::size_t>(i)](static_cast<std::uint64_t>(rank)));
    if (!self_edges_ && j >= i) ++j;
    return j;
}

void NetworkTopology::Cursor::load()
{
    if (rank_ >= degree_) return;
    // Renyi: the gaps of sorted uniforms in -log(1 - U) are Exp(1) / (d - r)
    SplitMix g(hash_key(topo_->seed_ ^ 0x5bd1e995ull, static_cast<std::uint64_t>(source_),
                        static_cast<std::uint64_t>(rank_)));
    double e = boost::random::exponential_distribution<double>()(g);
    log_tail_ -= e / static_cast<double>(degree_ - rank_);
    double u = 1.0 - std::exp(log_tail_);
    x_ = topo_->quantile(std::min(u, std::nextafter(1.0, 0.0)));
    target_ = topo_->target_of(source_, rank_);
}

void NetworkTopology::Cursor::next()
{
    ++rank_;
    load();
}

NetworkTopology::Cursor NetworkTopology::edges_from(std::int64_t i) const
{
    if (i < 0 || i >= n_) throw std::out_of_range("NetworkTopology: neuron index out of range");
    Cursor c;
    c.topo_ = this;
    c.source_ = i;
    c.degree_ = degree_[static_cast<std::size_t>(i)];
    c.load();
    return c;
}

std::vector<Edge> NetworkTopology::out_edges(std::int64_t i) const
{
    std::vector<Edge> out;
    for (auto c = edges_from(i); !c.done(); c.next()) out.push_back({c.target(), c.x()});
    return out;
}

std::optional<double> NetworkTopology::position(std::int64_t i, std::int64_t j) const
{
    if (j < 0 || j >= n_) throw std::out_of_range("NetworkTopology: neuron index out of range");
    if (!self_edges_ && i == j) return std::nullopt;
    auto jj = static_cast<std::uint64_t>(!self_edges_ && j > i ? j - 1 : j);
    auto rank = static_cast<std::int64_t>(perm_.at(static_cast<std::size_t>(i)).inverse(jj));
    if (rank >= degree_[static_cast<std::size_t>(i)]) return std::nullopt;
    auto c = edges_from(i);
    for (std::int64_t r = 0; r < rank; ++r) c.next();
    return c.x();
}

NetworkTopology sample_topology(const NetworkParams& net, const FunctionSpec& H, double L)
{
    return NetworkTopology(net.n, net.p_n, H, L, derive_seed(net.seed, 0x70f0), net.self_edges);
}

// ---------------------------------------------------------------------------
// soft network

NetworkTrace simulate_soft_network(const SoftParams& p, const NetworkParams& net, const NetworkTopology& topo,
                                   const NetworkOptions& opt, std::uint64_t seed)
{
    auto rep = validate_soft(p);
    if (!rep.ok()) throw std::invalid_argument("simulate_soft_network: " + rep.errors.front());
    check_network(net, topo, p.w, net.T);
    if (!(opt.bound_window > 0.0)) throw std::invalid_argument("simulate_soft_network: bound_window > 0 required");

    const auto n = static_cast<std::size_t>(net.n);
    const double w_n = net.w_n();
    Drift drift(p, opt.dt_ode);
    Network sys(topo, opt, p.rho, net.T, p.v_min, w_n);
    sys.tr.warnings = rep.warnings;

    struct Neuron {
        double V, t, window_end, bound;
        std::uint32_t version;
        SplitMix rng;
    };
    std::vector<Neuron> ns;
    ns.reserve(n);
    LawSampler f0(p.f0);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix rng(derive_seed(seed, i));
        double V0 = std::max(p.v_min, f0(rng.uniform()));
        ns.push_back({V0, 0.0, 0.0, 0.0, 0, rng});
    }

    // candidate after t inside the current window, else a refresh at its end
    auto candidate = [&](std::size_t i, double t) {
        Neuron& a = ns[i];
        double next = a.bound > 0.0 ? t + a.rng.exponential(a.bound) : kInf;
        sys.schedule_neuron(i, std::min(next, a.window_end), a.version);
    };
    auto restart = [&](std::size_t i, double t) {
        Neuron& a = ns[i];
        ++a.version;
        a.window_end = t + opt.bound_window;
        a.bound = p.lambda.sup_on(p.v_min, drift.reach(a.V, opt.bound_window));
        candidate(i, t);
    };
    for (std::size_t i = 0; i < n; ++i) restart(i, 0.0);

    auto on_neuron = [&](std::uint32_t idx, std::uint32_t tag, double t) {
        Neuron& a = ns[idx];
        if (tag != a.version) return;
        a.V = drift.flow(a.V, t - a.t);
        a.t = t;
        if (t >= a.window_end) {
            restart(idx, t);
            return;
        }
        if (a.rng.uniform() * a.bound < p.lambda(a.V)) {
            sys.tr.spikes[idx].push_back(t);
            a.V = p.v_min;
            sys.spike(idx, t + p.theta);
            restart(idx, t);
        } else {
            candidate(idx, t);
        }
    };
    auto on_hit = [&](std::size_t j, double t) {
        Neuron& a = ns[j];
        a.V = drift.flow(a.V, t - a.t) + w_n;
        a.t = t;
        restart(j, t);
    };
    auto on_sample = [&](std::uint32_t k, double t) {
        if (opt.record_potentials) {
            double* row = sys.tr.potentials.data() + static_cast<std::size_t>(k) * n;
            for (std::size_t i = 0; i < n; ++i) row[i] = drift.flow(ns[i].V, t - ns[i].t);
        }
        sys.sample_counts(k);
    };
    sys.run(on_neuron, on_hit, on_sample);
    return std::move(sys.tr);
}

// ---------------------------------------------------------------------------
// hard network

NetworkTrace simulate_hard_network(const HardParams& p, const NetworkParams& net, const NetworkTopology& topo,
                                   const NetworkOptions& opt, std::uint64_t seed, std::optional<double> V0)
{
    auto rep = validate_hard(p);
    if (!rep.ok()) throw std::invalid_argument("simulate_hard_network: " + rep.errors.front());
    check_network(net, topo, p.w, net.T);
    if (V0 && !(*V0 >= p.v_min && *V0 < p.v_max))
        throw std::invalid_argument("simulate_hard_network: V0 must lie in [v_min, v_max)");

    const auto n = static_cast<std::size_t>(net.n);
    const double w_n = net.w_n();
    Network sys(topo, opt, p.rho, net.T, p.v_min, w_n);
    sys.tr.warnings = rep.warnings;

    std::vector<double> V(n), t_last(n, 0.0);
    std::vector<std::uint32_t> version(n, 0);
    LawSampler f0(p.f0);
    const double top = std::nextafter(p.v_max, p.v_min);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix rng(derive_seed(seed, i));
        V[i] = V0 ? *V0 : std::clamp(f0(rng.uniform()), p.v_min, top);
    }
    auto schedule = [&](std::size_t i) {
        ++version[i];
        sys.schedule_neuron(i, p.I > 0.0 ? t_last[i] + (p.v_max - V[i]) / p.I : kInf, version[i]);
    };
    auto fire = [&](std::size_t i, double t) {
        sys.tr.spikes[i].push_back(t);
        V[i] = p.v_min;
        t_last[i] = t;
        sys.spike(i, t + p.theta);
        schedule(i);
    };
    for (std::size_t i = 0; i < n; ++i) schedule(i);

    auto on_neuron = [&](std::uint32_t i, std::uint32_t tag, double t) {
        if (tag == version[i]) fire(i, t);
    };
    auto on_hit = [&](std::size_t j, double t) {
        if (p.I > 0.0) {
            double cross = t_last[j] + (p.v_max - V[j]) / p.I;
            if (cross <= t + kHardTieWindow) fire(j, std::min(cross, t));
        }
        V[j] += p.I * (t - t_last[j]) + w_n;
        t_last[j] = t;
        if (V[j] >= p.v_max)
            fire(j, t);
        else
            schedule(j);
    };
    auto on_sample = [&](std::uint32_t k, double t) {
        if (opt.record_potentials) {
            double* row = sys.tr.potentials.data() + static_cast<std::size_t>(k) * n;
            for (std::size_t i = 0; i < n; ++i) row[i] = std::min(V[i] + p.I * (t - t_last[i]), top);
        }
        sys.sample_counts(k);
    };
    sys.run(on_neuron, on_hit, on_sample);
    return std::move(sys.tr);
}

// ---------------------------------------------------------------------------
// observables

std::size_t NetworkTrace::sample_index(double t) const
{
    if (samples == 0) throw std::out_of_range("NetworkTrace: no samples");
    double k = std::round((t - sample_t0) / sample_dt);
    if (k < 0.0 || k >= static_cast<double>(samples) ||
        std::abs(sample_time(static_cast<std::size_t>(k)) - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw std::out_of_range("NetworkTrace: t is not a sample time");
    return static_cast<std::size_t>(k);
}

RateCurve empirical_rate(const NetworkTrace& trace, const FunctionSpec& lambda)
{
    if (trace.potentials.empty()) throw std::invalid_argument("empirical_rate: potentials were not recorded");
    const auto n = static_cast<std::size_t>(trace.n);
    std::vector<double> values(trace.samples, 0.0);
    for (std::size_t k = 0; k < trace.samples; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += lambda(trace.potentials[k * n + i]);
        values[k] = s / static_cast<double>(n);
    }
    return RateCurve(trace.sample_t0, trace.sample_dt, std::move(values));
}

RateCurve empirical_excitation_rate(const NetworkTrace& trace)
{
    if (trace.samples < 3) throw std::invalid_argument("empirical_excitation_rate: needs at least 3 samples");
    const auto n = static_cast<std::size_t>(trace.n);
    std::vector<double> values(trace.samples - 1);
    for (std::size_t k = 0; k + 1 < trace.samples; ++k) {
        std::uint64_t d = 0;
        for (std::size_t i = 0; i < n; ++i)
            d += trace.excitation_counts[(k + 1) * n + i] - trace.excitation_counts[k * n + i];
        values[k] = static_cast<double>(d) / (static_cast<double>(n) * trace.sample_dt);
    }
    return RateCurve(trace.sample_t0 + 0.5 * trace.sample_dt, trace.sample_dt, std::move(values));
}

DensityGrid empirical_density(const NetworkTrace& trace, double t, std::size_t bins, double v_lo, double v_hi)
{
    if (bins == 0) throw std::invalid_argument("empirical_density: bins >= 1 required");
    if (trace.potentials.empty()) throw std::invalid_argument("empirical_density: potentials were not recorded");
    std::size_t k = trace.sample_index(t);
    const auto n = static_cast<std::size_t>(trace.n);
    const double* row = trace.potentials.data() + k * n;
    if (!(v_hi > v_lo)) {
        v_lo = trace.v_min;
        v_hi = *std::max_element(row, row + n) + 1e-9;
    }
    DensityGrid g;
    g.v_lo = v_lo;
    g.v_hi = v_hi;
    g.time = trace.sample_time(k);
    g.mass.assign(bins, 0.0);
    std::size_t counted = 0;
    const double h = (v_hi - v_lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < n; ++i) {
        if (row[i] < v_lo || row[i] > v_hi) continue;
        auto b = std::min(bins - 1, static_cast<std::size_t>((row[i] - v_lo) / h));
        g.mass[b] += 1.0;
        ++counted;
    }
    if (counted == 0) throw std::invalid_argument("empirical_density: no potential inside the range");
    for (double& m : g.mass) m /= static_cast<double>(counted);
    return g;
}

void write_spikes_csv(std::ostream& out, const NetworkTrace& trace)
{
    char buf[64];
    out << "neuron,time\n";
    for (std::size_t i = 0; i < trace.spikes.size(); ++i)
        for (double t : trace.spikes[i]) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, t);
            out << buf;
        }
}

}  // namespace dendrite
