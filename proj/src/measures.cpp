#include "cgrg/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cgrg/numeric.hpp"

namespace cgrg {

namespace {

void require_finite_nonnegative(std::span<const double> w, const char* what) {
    for (double v : w)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": weights must be finite and >= 0");
}

}  // namespace

// ---------------------------------------------------------------------------
// Measure types
// ---------------------------------------------------------------------------

ColourMeasure::ColourMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
    require_finite_nonnegative(weights_, "ColourMeasure");
}

double ColourMeasure::total_mass() const { return pairwise_sum(weights_); }

PairMeasure::PairMeasure(SquareMatrix weights) : w_(std::move(weights)) {
    require_finite_nonnegative(w_.data(), "PairMeasure");
}

Profile::Profile(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) {
        if (!entries_.empty() && entries_.back().first == e.first)
            throw std::invalid_argument("Profile: colour " + std::to_string(e.first) + " listed twice");
        if (e.second > 0) entries_.push_back(e);
    }
}

Profile Profile::from_dense(std::span<const std::uint32_t> counts) {
    Profile p;
    for (std::size_t b = 0; b < counts.size(); ++b)
        if (counts[b] > 0) p.entries_.emplace_back(static_cast<std::uint32_t>(b), counts[b]);
    return p;
}

std::uint32_t Profile::count(std::uint32_t colour) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{colour, 0});
    return (it != entries_.end() && it->first == colour) ? it->second : 0;
}

std::uint64_t Profile::total() const {
    std::uint64_t t = 0;
    for (const auto& e : entries_) t += e.second;
    return t;
}

std::vector<std::string> Profile::tokens() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [c, m] : entries_) out.push_back("(" + std::to_string(c) + ":" + std::to_string(m) + ")");
    return out;
}

Profile Profile::from_tokens(std::span<const std::string> tokens) {
    std::vector<Entry> entries;
    for (const auto& t : tokens) {
        const auto colon = t.find(':');
        if (t.size() < 5 || t.front() != '(' || t.back() != ')' || colon == std::string::npos)
            throw std::invalid_argument("Profile: malformed token '" + t + "'");
        try {
            std::size_t used = 0;
            const std::string cs = t.substr(1, colon - 1);
            const std::string ms = t.substr(colon + 1, t.size() - colon - 2);
            const unsigned long c = std::stoul(cs, &used);
            if (used != cs.size()) throw std::invalid_argument(t);
            const unsigned long m = std::stoul(ms, &used);
            if (used != ms.size()) throw std::invalid_argument(t);
            entries.emplace_back(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(m));
        } catch (const std::logic_error&) {
            throw std::invalid_argument("Profile: malformed token '" + t + "'");
        }
    }
    return Profile(std::move(entries));
}

NeighbourhoodMeasure::NeighbourhoodMeasure(std::size_t k, std::vector<Entry> entries, double truncated_mass)
    : k_(k), truncated_mass_(truncated_mass) {
    if (!(truncated_mass >= 0.0)) throw std::invalid_argument("NeighbourhoodMeasure: negative truncated mass");
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.key < y.key; });
    for (auto& e : entries) {
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw std::invalid_argument("NeighbourhoodMeasure: weights must be finite and >= 0");
        if (e.key.colour >= k_)
            throw std::invalid_argument("NeighbourhoodMeasure: colour " + std::to_string(e.key.colour) +
                                        " outside alphabet");
        for (const auto& [c, m] : e.key.profile.entries())
            if (c >= k_)
                throw std::invalid_argument("NeighbourhoodMeasure: profile colour " + std::to_string(c) +
                                            " outside alphabet");
        if (!entries_.empty() && entries_.back().key == e.key)
            entries_.back().weight += e.weight;
        else
            entries_.push_back(std::move(e));
    }
    std::erase_if(entries_, [](const Entry& e) { return e.weight == 0.0; });
}

double NeighbourhoodMeasure::weight(const NeighbourhoodKey& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const NeighbourhoodKey& k) { return e.key < k; });
    return (it != entries_.end() && it->key == key) ? it->weight : 0.0;
}

double NeighbourhoodMeasure::total_mass() const {
    std::vector<double> w;
    w.reserve(entries_.size());
    for (const auto& e : entries_) w.push_back(e.weight);
    return pairwise_sum(w);
}

DegreeDistribution::DegreeDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
    require_finite_nonnegative(weights_, "DegreeDistribution");
}

DegreeDistribution DegreeDistribution::poisson(double mean, double tail_tol) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: mean must be finite, >= 0");
    std::uint64_t cap = static_cast<std::uint64_t>(mean);
    while (poisson_upper_tail(mean, cap) >= tail_tol) cap += 1 + cap / 8;
    std::vector<double> w(cap + 1);
    for (std::uint64_t m = 0; m <= cap; ++m) w[m] = poisson_pmf(mean, m);
    const double total = pairwise_sum(w);
    for (double& v : w) v /= total;
    return DegreeDistribution(std::move(w));
}

DegreeDistribution DegreeDistribution::point_mass(std::size_t m) {
    std::vector<double> w(m + 1, 0.0);
    w[m] = 1.0;
    return DegreeDistribution(std::move(w));
}

double DegreeDistribution::total_mass() const { return pairwise_sum(weights_); }

double DegreeDistribution::mean() const {
    std::vector<double> t(weights_.size());
    for (std::size_t m = 0; m < weights_.size(); ++m) t[m] = static_cast<double>(m) * weights_[m];
    return pairwise_sum(t);
}

// ---------------------------------------------------------------------------
// Empirical measures
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> EmpiricalCounts::profile_pair_counts() const {
    std::vector<std::uint64_t> h2(k * k, 0);
    for (const auto& [key, count] : profile_counts)
        for (const auto& [b, l] : key.profile.entries()) h2[b * k + key.colour] += std::uint64_t{l} * count;
    return h2;
}

EmpiricalMeasures empirical_measures(const GraphSample& sample) {
    validate_structure(sample);
    const std::size_t n = sample.n;
    const std::size_t k = sample.k;

    EmpiricalCounts counts;
    counts.n = n;
    counts.k = k;
    counts.edge_count = sample.edges.size();
    counts.colour_counts.assign(k, 0);
    counts.pair_counts.assign(k * k, 0);

    std::vector<std::uint32_t> dense(n * k, 0);  // dense profiles, one row per vertex
    for (auto c : sample.colours) ++counts.colour_counts[c];
    for (const auto& [u, v] : sample.edges) {
        const auto cu = sample.colours[u];
        const auto cv = sample.colours[v];
        ++counts.pair_counts[cu * k + cv];
        ++counts.pair_counts[cv * k + cu];
        ++dense[u * k + cv];
        ++dense[v * k + cu];
    }

    std::map<NeighbourhoodKey, std::uint64_t> profiles;
    std::vector<std::uint64_t> degrees;
    for (std::size_t v = 0; v < n; ++v) {
        std::span<const std::uint32_t> row(dense.data() + v * k, k);
        NeighbourhoodKey key{sample.colours[v], Profile::from_dense(row)};
        const std::uint64_t deg = key.profile.total();
        if (degrees.size() <= deg) degrees.resize(deg + 1, 0);
        ++degrees[deg];
        ++profiles[std::move(key)];
    }
    if (degrees.empty()) degrees.push_back(0);
    counts.profile_counts.assign(profiles.begin(), profiles.end());
    counts.degree_counts = std::move(degrees);

    const double nd = static_cast<double>(n);
    std::vector<double> l1(k);
    for (std::size_t a = 0; a < k; ++a) l1[a] = static_cast<double>(counts.colour_counts[a]) / nd;
    SquareMatrix l2(k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) l2(a, b) = static_cast<double>(counts.pair_count(a, b)) / nd;
    std::vector<NeighbourhoodMeasure::Entry> m;
    m.reserve(counts.profile_counts.size());
    for (const auto& [key, c] : counts.profile_counts) m.push_back({key, static_cast<double>(c) / nd});
    std::vector<double> deg(counts.degree_counts.size());
    for (std::size_t i = 0; i < deg.size(); ++i) deg[i] = static_cast<double>(counts.degree_counts[i]) / nd;

    return EmpiricalMeasures{ColourMeasure(std::move(l1)), PairMeasure(std::move(l2)),
                             NeighbourhoodMeasure(k, std::move(m)), DegreeDistribution(std::move(deg)),
                             std::move(counts)};
}

// ---------------------------------------------------------------------------
// Relative entropy and the pair functional
// ---------------------------------------------------------------------------

double relative_entropy(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("relative_entropy: supports differ (" + std::to_string(p.size()) + " vs " +
                                    std::to_string(q.size()) + ")");
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        terms[i] = entropy_term(p[i], q[i]);
        if (terms[i] == kInf) return kInf;
    }
    return pairwise_sum(terms);
}

double relative_entropy(const ColourMeasure& p, const ColourMeasure& q) {
    return relative_entropy(p.weights(), q.weights());
}

double relative_entropy(const PairMeasure& p, const PairMeasure& q) {
    return relative_entropy(p.matrix().data(), q.matrix().data());
}

double relative_entropy(const DegreeDistribution& p, const DegreeDistribution& q) {
    const std::size_t len = std::max(p.size(), q.size());
    std::vector<double> pp(len), qq(len);
    for (std::size_t m = 0; m < len; ++m) {
        pp[m] = p[m];
        qq[m] = q[m];
    }
    return relative_entropy(pp, qq);
}

double relative_entropy(const NeighbourhoodMeasure& p, const NeighbourhoodMeasure& q) {
    if (p.colours() != q.colours()) throw std::invalid_argument("relative_entropy: alphabets differ");
    std::vector<double> terms;
    terms.reserve(p.entries().size());
    for (const auto& e : p.entries()) {
        terms.push_back(entropy_term(e.weight, q.weight(e.key)));
        if (terms.back() == kInf) return kInf;
    }
    return pairwise_sum(terms);
}

double h_functional(const PairMeasure& varpi, const ColourMeasure& omega, const ModelParameters& params) {
    const std::size_t k = params.k();
    if (varpi.size() != k || omega.size() != k)
        throw std::invalid_argument("h_functional: dimension mismatch (k=" + std::to_string(k) + ", varpi " +
                                    std::to_string(varpi.size()) + ", omega " + std::to_string(omega.size()) + ")");
    if (!varpi.is_symmetric(1e-12 * std::max(1.0, varpi.matrix().max())))
        throw std::invalid_argument("h_functional: varpi must be symmetric");
    const double rho = params.rho();
    std::vector<double> h_terms, base_terms, mass_terms;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            const double base = rho * params.kernel(a, b) * omega[a] * omega[b];
            const double t = entropy_term(varpi(a, b), base);
            if (t == kInf) return kInf;
            h_terms.push_back(t);
            base_terms.push_back(base);
            mass_terms.push_back(varpi(a, b));
        }
    return pairwise_sum(h_terms) + pairwise_sum(base_terms) - pairwise_sum(mass_terms);
}

// ---------------------------------------------------------------------------
// Q[varpi, mu_1]
// ---------------------------------------------------------------------------

namespace {

void check_q_inputs(const PairMeasure& varpi, const ColourMeasure& mu1) {
    if (varpi.size() != mu1.size()) throw std::invalid_argument("q_measure: dimension mismatch");
    for (std::size_t a = 0; a < mu1.size(); ++a) {
        if (mu1[a] > 0.0) continue;
        for (std::size_t b = 0; b < mu1.size(); ++b)
            if (varpi(a, b) > 0.0)
                throw std::domain_error("q_measure: varpi(" + std::to_string(a) + "," + std::to_string(b) +
                                        ") > 0 but mu_1(" + std::to_string(a) + ") = 0");
    }
}

}  // namespace

double log_q_weight(const PairMeasure& varpi, const ColourMeasure& mu1, const NeighbourhoodKey& key) {
    check_q_inputs(varpi, mu1);
    const std::size_t a = key.colour;
    if (a >= mu1.size()) throw std::invalid_argument("log_q_weight: colour outside alphabet");
    if (mu1[a] == 0.0) return -kInf;
    double lw = std::log(mu1[a]);
    for (std::size_t b = 0; b < mu1.size(); ++b) {
        const double lambda = varpi(a, b) / mu1[a];
        lw += log_poisson_pmf(lambda, key.profile.count(static_cast<std::uint32_t>(b)));
    }
    return lw;
}

namespace {

// Q on profiles with l(b) <= caps[a*k + b] given colour a.
NeighbourhoodMeasure enumerate_q(const PairMeasure& varpi, const ColourMeasure& mu1,
                                 const std::vector<std::uint32_t>& caps) {
    const std::size_t k = mu1.size();
    std::vector<NeighbourhoodMeasure::Entry> entries;
    std::vector<double> lost;
    for (std::size_t a = 0; a < k; ++a) {
        if (mu1[a] == 0.0) continue;
        std::vector<std::uint32_t> active, cap;
        std::vector<double> lambda;
        double log_kept = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            const double l = varpi(a, b) / mu1[a];
            if (l <= 0.0) continue;
            active.push_back(static_cast<std::uint32_t>(b));
            cap.push_back(caps[a * k + b]);
            lambda.push_back(l);
            log_kept += std::log1p(-poisson_upper_tail(l, cap.back()));
        }
        lost.push_back(-mu1[a] * std::expm1(log_kept));

        // log pmf tables, then an odometer over the active counts
        std::vector<std::vector<double>> log_pmf(active.size());
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::uint32_t m = 0; m <= cap[i]; ++m) log_pmf[i].push_back(log_poisson_pmf(lambda[i], m));
        std::vector<std::uint32_t> counts(active.size(), 0);
        while (true) {
            double lw = std::log(mu1[a]);
            std::vector<Profile::Entry> prof;
            for (std::size_t i = 0; i < active.size(); ++i) {
                lw += log_pmf[i][counts[i]];
                if (counts[i] > 0) prof.emplace_back(active[i], counts[i]);
            }
            const double w = std::exp(lw);
            if (w > 0.0)
                entries.push_back({NeighbourhoodKey{static_cast<std::uint32_t>(a), Profile(std::move(prof))}, w});
            std::size_t i = 0;
            while (i < counts.size() && counts[i] == cap[i]) counts[i++] = 0;
            if (i == counts.size()) break;
            ++counts[i];
        }
    }
    return NeighbourhoodMeasure(k, std::move(entries), std::max(0.0, pairwise_sum(lost)));
}

}  // namespace

NeighbourhoodMeasure q_measure(const PairMeasure& varpi, const ColourMeasure& mu1, std::uint32_t cap) {
    check_q_inputs(varpi, mu1);
    return enumerate_q(varpi, mu1, std::vector<std::uint32_t>(mu1.size() * mu1.size(), cap));
}

NeighbourhoodMeasure q_measure_adaptive(const PairMeasure& varpi, const ColourMeasure& mu1, double tol,
                                        std::uint32_t initial_cap) {
    if (!(tol > 0.0)) throw std::invalid_argument("q_measure_adaptive: tol must be > 0");
    check_q_inputs(varpi, mu1);
    const std::size_t k = mu1.size();
    // lost mass <= sum_a mu1(a) sum_b tail(a,b), so a per-pair tail budget of
    // tol / (2 k max(1, ||mu1||)) keeps the total below tol/2
    const double budget = tol / (2.0 * static_cast<double>(k) * std::max(1.0, mu1.total_mass()));
    std::vector<std::uint32_t> caps(k * k, 0);
    for (std::size_t a = 0; a < k; ++a) {
        if (mu1[a] == 0.0) continue;
        for (std::size_t b = 0; b < k; ++b) {
            const double l = varpi(a, b) / mu1[a];
            std::uint32_t cap = std::max<std::uint32_t>(initial_cap, 1);
            while (l > 0.0 && poisson_upper_tail(l, cap) > budget) {
                if (cap > (1u << 16)) throw std::runtime_error("q_measure_adaptive: truncation cap exceeded 65536");
                cap *= 2;
            }
            caps[a * k + b] = cap;
        }
    }
    return enumerate_q(varpi, mu1, caps);
}

ProfileMarginals profile_marginals(const NeighbourhoodMeasure& mu) {
    const std::size_t k = mu.colours();
    std::vector<std::vector<double>> mu1_terms(k);
    std::vector<std::vector<double>> h2_terms(k * k);
    for (const auto& e : mu.entries()) {
        const std::size_t a = e.key.colour;
        mu1_terms[a].push_back(e.weight);
        for (const auto& [b, l] : e.key.profile.entries()) h2_terms[b * k + a].push_back(l * e.weight);
    }
    std::vector<double> mu1(k);
    for (std::size_t a = 0; a < k; ++a) mu1[a] = pairwise_sum(mu1_terms[a]);
    SquareMatrix h2(k);
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t a = 0; a < k; ++a) h2(b, a) = pairwise_sum(h2_terms[b * k + a]);
    return {ColourMeasure(std::move(mu1)), PairMeasure(std::move(h2))};
}

std::string_view to_string(Consistency c) {
    switch (c) {
        case Consistency::consistent: return "consistent";
        case Consistency::sub_consistent: return "sub_consistent";
        case Consistency::inconsistent: return "inconsistent";
    }
    return "?";
}

Consistency check_consistency(const PairMeasure& varpi, const NeighbourhoodMeasure& mu, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("check_consistency: tol must be > 0");
    if (varpi.size() != mu.colours()) throw std::invalid_argument("check_consistency: dimension mismatch");
    const auto h2 = profile_marginals(mu).h2;
    bool equal = true;
    for (std::size_t b = 0; b < varpi.size(); ++b)
        for (std::size_t a = 0; a < varpi.size(); ++a) {
            const double diff = h2(b, a) - varpi(b, a);
            if (diff > tol) return Consistency::inconsistent;
            if (diff < -tol) equal = false;
        }
    return equal ? Consistency::consistent : Consistency::sub_consistent;
}

double total_variation(const NeighbourhoodMeasure& p, const NeighbourhoodMeasure& q) {
    std::vector<double> diffs;
    auto pi = p.entries().begin();
    auto qi = q.entries().begin();
    while (pi != p.entries().end() || qi != q.entries().end()) {
        if (qi == q.entries().end() || (pi != p.entries().end() && pi->key < qi->key)) {
            diffs.push_back(pi->weight);
            ++pi;
        } else if (pi == p.entries().end() || qi->key < pi->key) {
            diffs.push_back(qi->weight);
            ++qi;
        } else {
            diffs.push_back(std::abs(pi->weight - qi->weight));
            ++pi;
            ++qi;
        }
    }
    return 0.5 * (pairwise_sum(diffs) + p.truncated_mass() + q.truncated_mass());
}

double total_variation(const DegreeDistribution& p, const DegreeDistribution& q) {
    const std::size_t len = std::max(p.size(), q.size());
    std::vector<double> diffs(len);
    for (std::size_t m = 0; m < len; ++m) diffs[m] = std::abs(p[m] - q[m]);
    return 0.5 * pairwise_sum(diffs);
}

}  // namespace cgrg
