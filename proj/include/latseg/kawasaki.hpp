#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "latseg/field.hpp"
#include "latseg/rng.hpp"

namespace latseg {

struct SimParams {
    int d = 1;
    int N = 16;
    double d1 = 1.0, d2 = 1.0; // exchange rate coefficients
    double K = 1.0;            // annihilation rate per doubly occupied site
    std::uint64_t seed = 0;
};

enum class EventKind : std::uint8_t { Exchange1, Exchange2, Kill };

struct Event {
    double time;
    EventKind kind;
    long site;  // lower endpoint of the bond, or the killed site
    int axis;   // bond direction; -1 for kills
};

using EventLog = std::vector<Event>;

/// Smooth test function on [0,1)^d, evaluated at r = x/N.
using TestFn = std::function<double(const double* r, int d)>;

/// Riemann pairing N^{-d} sum_x sigma_{i,x} phi(x/N).
double empirical_pairing(const PairConfig& cfg, const TestFn& phi, int species);

/// Independent site occupations with P(sigma_{i,x} = 1) = u_i(x).
/// Deterministic given the generator state. Rejects values outside [0,1].
PairConfig sample_bernoulli_pair(const DensityField& u1, const DensityField& u2, Xoshiro256pp& rng);

/// Dynamic set with O(1) insert/erase/sample, keyed by a dense id space.
class IndexedSet {
public:
    void reset(long universe) {
        pos_.assign(universe, -1);
        items_.clear();
    }
    bool contains(long id) const { return pos_[id] >= 0; }
    void insert(long id) {
        if (pos_[id] >= 0) return;
        pos_[id] = static_cast<long>(items_.size());
        items_.push_back(id);
    }
    void erase(long id) {
        long p = pos_[id];
        if (p < 0) return;
        long last = items_.back();
        items_[p] = last;
        pos_[last] = p;
        items_.pop_back();
        pos_[id] = -1;
    }
    long size() const { return static_cast<long>(items_.size()); }
    long at(long k) const { return items_[k]; }

private:
    std::vector<long> pos_;
    std::vector<long> items_;
};

/// Event-driven simulation of the two-species exchange dynamics with pair
/// annihilation. Exchange of species i across a discrepant bond fires at
/// rate N^2 d_i; a doubly occupied site is cleared at rate K. Bonds with
/// equal occupancy are no-ops and carry no rate. Per-event cost is O(d).
class KawasakiSim {
public:
    KawasakiSim(const PairConfig& initial, const SimParams& p);

    const PairConfig& config() const { return cfg_; }
    double time() const { return t_; }
    long count(int species) const { return n_[species - 1]; }
    long kills() const { return kills_; }
    long events() const { return events_; }

    long discrepant_bonds(int species) const { return disc_[species - 1].size(); }
    long doubly_occupied() const { return doubly_.size(); }

    /// N^2 d1 B1 + N^2 d2 B2 + K M for the current configuration.
    double total_rate() const;

    /// Advance by one event. Returns the event, or nullopt from an
    /// absorbing state (total rate zero).
    std::optional<Event> step();

    /// Run until the cumulative time reaches t_end. Observers fire at the
    /// requested macroscopic times (must be sorted, <= t_end) with the
    /// configuration holding at that instant. Absorption terminates
    /// normally, with remaining observers seeing the frozen state.
    void run(double t_end, const std::vector<double>& observe_times,
             const std::function<void(double, const PairConfig&)>& observer,
             EventLog* log = nullptr);

    /// Recount B1, B2, M from scratch and compare with the incremental
    /// tables. Returns true when they agree exactly.
    bool audit() const;

    Xoshiro256pp& rng() { return rng_; }

private:
    long bond_id(long x, int axis) const { return x * torus_.dim() + axis; }
    Event select_and_apply();
    void refresh_bond(int species, long x, int axis);
    void refresh_site(long x);
    void apply_exchange(int species, long x, int axis);
    void apply_kill(long x);

    Torus torus_;
    SimParams p_;
    PairConfig cfg_;
    Xoshiro256pp rng_;
    IndexedSet disc_[2]; // discrepant bonds per species, id = x*d + axis
    IndexedSet doubly_;  // doubly occupied sites
    std::vector<long> plus_;  // shift(x, axis, +1), layout x*d + axis
    std::vector<long> minus_; // shift(x, axis, -1)
    double t_ = 0.0;
    double w_[2]; // N^2 d_i
    long n_[2];
    long kills_ = 0;
    long events_ = 0;
};

} // namespace latseg
