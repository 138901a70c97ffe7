#include "latseg/kawasaki.hpp"

#include <cmath>
#include <stdexcept>

namespace latseg {

double empirical_pairing(const PairConfig& cfg, const TestFn& phi, int species) {
    const Torus& t = cfg.torus;
    const auto& sig = cfg.species(species);
    const double invN = 1.0 / t.side();
    double r[3];
    double acc = 0.0;
    for (long s = 0; s < t.nsites(); ++s) {
        if (!sig[s]) continue;
        auto c = t.coords(s);
        for (int j = 0; j < t.dim(); ++j) r[j] = c[j] * invN;
        acc += phi(r, t.dim());
    }
    return acc / static_cast<double>(t.nsites());
}

PairConfig sample_bernoulli_pair(const DensityField& u1, const DensityField& u2,
                                 Xoshiro256pp& rng) {
    if (!(u1.torus == u2.torus))
        throw std::invalid_argument("sample_bernoulli_pair: mismatched tori");
    for (long s = 0; s < u1.size(); ++s)
        if (u1[s] < 0.0 || u1[s] > 1.0 || u2[s] < 0.0 || u2[s] > 1.0)
            throw std::invalid_argument("sample_bernoulli_pair: mean outside [0,1]");
    PairConfig cfg(u1.torus);
    for (long s = 0; s < u1.size(); ++s) cfg.sigma1[s] = rng.bernoulli(u1[s]) ? 1 : 0;
    for (long s = 0; s < u2.size(); ++s) cfg.sigma2[s] = rng.bernoulli(u2[s]) ? 1 : 0;
    return cfg;
}

KawasakiSim::KawasakiSim(const PairConfig& initial, const SimParams& p)
    : torus_(initial.torus), p_(p), cfg_(initial), rng_(p.seed) {
    if (p.d != torus_.dim() || p.N != torus_.side())
        throw std::invalid_argument("KawasakiSim: params disagree with configuration torus");
    if (p.d1 <= 0.0 || p.d2 <= 0.0 || p.K < 0.0)
        throw std::invalid_argument("KawasakiSim: need d1, d2 > 0 and K >= 0");
    const double N2 = static_cast<double>(p.N) * p.N;
    w_[0] = N2 * p.d1;
    w_[1] = N2 * p.d2;

    const int d = torus_.dim();
    const long n = torus_.nsites();
    plus_.resize(n * d);
    minus_.resize(n * d);
    for (long x = 0; x < n; ++x)
        for (int j = 0; j < d; ++j) {
            plus_[x * d + j] = torus_.shift(x, j, +1);
            minus_[x * d + j] = torus_.shift(x, j, -1);
        }

    disc_[0].reset(n * d);
    disc_[1].reset(n * d);
    doubly_.reset(n);
    for (long x = 0; x < n; ++x) {
        for (int j = 0; j < d; ++j) {
            long y = plus_[x * d + j];
            if (cfg_.sigma1[x] != cfg_.sigma1[y]) disc_[0].insert(bond_id(x, j));
            if (cfg_.sigma2[x] != cfg_.sigma2[y]) disc_[1].insert(bond_id(x, j));
        }
        if (cfg_.sigma1[x] && cfg_.sigma2[x]) doubly_.insert(x);
    }
    n_[0] = cfg_.count(1);
    n_[1] = cfg_.count(2);
}

double KawasakiSim::total_rate() const {
    return w_[0] * disc_[0].size() + w_[1] * disc_[1].size() + p_.K * doubly_.size();
}

void KawasakiSim::refresh_bond(int species, long x, int axis) {
    long y = plus_[x * torus_.dim() + axis];
    const auto& sig = species == 0 ? cfg_.sigma1 : cfg_.sigma2;
    long id = bond_id(x, axis);
    if (sig[x] != sig[y])
        disc_[species].insert(id);
    else
        disc_[species].erase(id);
}

void KawasakiSim::refresh_site(long x) {
    if (cfg_.sigma1[x] && cfg_.sigma2[x])
        doubly_.insert(x);
    else
        doubly_.erase(x);
}

void KawasakiSim::apply_exchange(int species, long x, int axis) {
    const int d = torus_.dim();
    long y = plus_[x * d + axis];
    auto& sig = species == 0 ? cfg_.sigma1 : cfg_.sigma2;
    std::swap(sig[x], sig[y]);
    // bonds incident to either endpoint change discrepancy state
    for (int j = 0; j < d; ++j) {
        refresh_bond(species, x, j);
        refresh_bond(species, minus_[x * d + j], j);
        refresh_bond(species, y, j);
        refresh_bond(species, minus_[y * d + j], j);
    }
    refresh_site(x);
    refresh_site(y);
}

void KawasakiSim::apply_kill(long x) {
    const int d = torus_.dim();
    cfg_.sigma1[x] = 0;
    cfg_.sigma2[x] = 0;
    for (int j = 0; j < d; ++j) {
        refresh_bond(0, x, j);
        refresh_bond(0, minus_[x * d + j], j);
        refresh_bond(1, x, j);
        refresh_bond(1, minus_[x * d + j], j);
    }
    doubly_.erase(x);
    --n_[0];
    --n_[1];
    ++kills_;
}

// Pick the event category proportionally to its rate, then a uniform
// member; apply it. The clock must already be advanced.
Event KawasakiSim::select_and_apply() {
    const double r1 = w_[0] * disc_[0].size();
    const double r2 = w_[1] * disc_[1].size();
    const double total = r1 + r2 + p_.K * doubly_.size();
    const double u = rng_.uniform01() * total;
    Event ev;
    ev.time = t_;
    if ((u < r1 && disc_[0].size() > 0) || disc_[1].size() + doubly_.size() == 0) {
        long id = disc_[0].at(rng_.uniform_index(disc_[0].size()));
        ev.kind = EventKind::Exchange1;
        ev.site = id / torus_.dim();
        ev.axis = static_cast<int>(id % torus_.dim());
        apply_exchange(0, ev.site, ev.axis);
    } else if ((u < r1 + r2 && disc_[1].size() > 0) || doubly_.size() == 0) {
        long id = disc_[1].at(rng_.uniform_index(disc_[1].size()));
        ev.kind = EventKind::Exchange2;
        ev.site = id / torus_.dim();
        ev.axis = static_cast<int>(id % torus_.dim());
        apply_exchange(1, ev.site, ev.axis);
    } else {
        long x = doubly_.at(rng_.uniform_index(doubly_.size()));
        ev.kind = EventKind::Kill;
        ev.site = x;
        ev.axis = -1;
        apply_kill(x);
    }
    ++events_;
    return ev;
}

std::optional<Event> KawasakiSim::step() {
    const double total = total_rate();
    if (total <= 0.0) return std::nullopt;
    t_ += rng_.exponential(total);
    return select_and_apply();
}

void KawasakiSim::run(double t_end, const std::vector<double>& observe_times,
                      const std::function<void(double, const PairConfig&)>& observer,
                      EventLog* log) {
    if (t_end < 0.0) throw std::invalid_argument("KawasakiSim::run: negative horizon");
    std::size_t next_obs = 0;
    while (next_obs < observe_times.size() && observe_times[next_obs] < t_) ++next_obs;

    while (t_ < t_end) {
        const double total = total_rate();
        // holding-time draw; the state is frozen until t_next
        const double t_next = total > 0.0 ? t_ + rng_.exponential(total) : t_end;
        while (next_obs < observe_times.size() && observe_times[next_obs] <= t_next &&
               observe_times[next_obs] <= t_end) {
            observer(observe_times[next_obs], cfg_);
            ++next_obs;
        }
        if (total <= 0.0 || t_next >= t_end) {
            t_ = t_end;
            break;
        }
        t_ = t_next;
        Event ev = select_and_apply();
        if (log) log->push_back(ev);
    }
    while (next_obs < observe_times.size() && observe_times[next_obs] <= t_end) {
        observer(observe_times[next_obs], cfg_);
        ++next_obs;
    }
}

bool KawasakiSim::audit() const {
    const int d = torus_.dim();
    long b[2] = {0, 0}, m = 0;
    for (long x = 0; x < torus_.nsites(); ++x) {
        for (int j = 0; j < d; ++j) {
            long y = plus_[x * d + j];
            if (cfg_.sigma1[x] != cfg_.sigma1[y]) ++b[0];
            if (cfg_.sigma2[x] != cfg_.sigma2[y]) ++b[1];
        }
        if (cfg_.sigma1[x] && cfg_.sigma2[x]) ++m;
    }
    bool ok = b[0] == disc_[0].size() && b[1] == disc_[1].size() && m == doubly_.size();
    if (!ok) return false;
    // membership check, not just counts
    for (long x = 0; x < torus_.nsites(); ++x)
        for (int j = 0; j < d; ++j) {
            long y = plus_[x * d + j];
            if ((cfg_.sigma1[x] != cfg_.sigma1[y]) != disc_[0].contains(bond_id(x, j))) return false;
            if ((cfg_.sigma2[x] != cfg_.sigma2[y]) != disc_[1].contains(bond_id(x, j))) return false;
        }
    return true;
}

} // namespace latseg
