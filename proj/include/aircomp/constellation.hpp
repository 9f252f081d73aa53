#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/error.hpp"
#include "aircomp/function.hpp"
#include "aircomp/quantizer.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

constexpr long kMaxEnumerableTuples = 1000000;
constexpr long kMaxDesignTuples = 10000;

// f over all M^K level tuples; tuple index = sum_k i_k M^k.
struct FunctionTable {
    int M = 2;
    int K = 1;
    std::vector<double> values;

    long size() const { return static_cast<long>(values.size()); }

    std::vector<int> tuple(long idx) const {
        std::vector<int> t(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            t[static_cast<std::size_t>(k)] = static_cast<int>(idx % M);
            idx /= M;
        }
        return t;
    }
};

inline long tuple_count(int M, int K, long cap) {
    require(M >= 1 && K >= 1, "bad M or K");
    long n = 1;
    for (int k = 0; k < K; ++k) {
        n *= M;
        if (n > cap) throw ConstraintViolation("M^K exceeds the enumeration limit");
    }
    return n;
}

inline FunctionTable make_function_table(int M, int K, const std::function<double(const std::vector<int>&)>& f,
                                         long cap = kMaxEnumerableTuples) {
    FunctionTable t{M, K, {}};
    const long n = tuple_count(M, K, cap);
    t.values.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) t.values[static_cast<std::size_t>(i)] = f(t.tuple(i));
    return t;
}

// Table for a FunctionSpec evaluated on the quantizer's level values.
inline FunctionTable make_function_table(const FunctionSpec& spec, const Quantizer& q, long cap = kMaxEnumerableTuples) {
    FunctionSpec s = spec;
    s.input_range = {std::min(spec.input_range.lo, q.range().lo), std::max(spec.input_range.hi, q.range().hi)};
    return make_function_table(q.levels(), spec.K, [&](const std::vector<int>& t) {
        std::vector<double> v;
        v.reserve(t.size());
        for (int i : t) v.push_back(q.value(i));
        return evaluate_function(s, std::span<const double>(v));
    }, cap);
}

struct Constellation {
    std::vector<CVec> points; // K lists of M symbols
    std::vector<double> budgets;
    FunctionTable table;

    int K() const { return static_cast<int>(points.size()); }
    int M() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }

    void validate() const {
        require(!points.empty(), "empty constellation");
        require(budgets.size() == points.size(), "budget count != node count");
        require(table.K == K() && table.M == M(), "function table shape mismatch");
        for (std::size_t k = 0; k < points.size(); ++k) {
            require(static_cast<int>(points[k].size()) == M(), "ragged constellation");
            for (cplx a : points[k])
                if (std::norm(a) > budgets[k] * (1.0 + 1e-9) + 1e-12)
                    throw ConstraintViolation("constellation point exceeds the power budget");
        }
    }

    cplx superposition(long tuple_idx) const {
        cplx s{};
        for (int k = 0; k < K(); ++k) {
            s += points[static_cast<std::size_t>(k)][static_cast<std::size_t>(tuple_idx % M())];
            tuple_idx /= M();
        }
        return s;
    }

    double collision_tolerance() const {
        return 1e-6 * std::sqrt(*std::max_element(budgets.begin(), budgets.end()));
    }
};

struct Collision {
    double f_a = 0.0;
    double f_b = 0.0; // f_a < f_b
    cplx point{};
    long tuple_a = 0;
    long tuple_b = 0;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Collision> violations;
};

namespace detail {

struct CellHash {
    std::size_t operator()(const std::pair<long long, long long>& c) const {
        return static_cast<std::size_t>(splitmix64(static_cast<std::uint64_t>(c.first) * 0x100000001B3ULL ^
                                                   static_cast<std::uint64_t>(c.second)));
    }
};

// Groups tuple sums into clusters of points within tol (single linkage on a grid).
inline std::vector<std::vector<long>> cluster_sums(const std::vector<cplx>& sums, double tol) {
    const long n = static_cast<long>(sums.size());
    std::vector<long> parent(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<long(long)> find = [&](long x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    std::unordered_map<std::pair<long long, long long>, std::vector<long>, CellHash> grid;
    auto cell = [tol](cplx z) {
        return std::pair<long long, long long>{static_cast<long long>(std::floor(z.real() / tol)),
                                               static_cast<long long>(std::floor(z.imag() / tol))};
    };
    for (long i = 0; i < n; ++i) grid[cell(sums[static_cast<std::size_t>(i)])].push_back(i);
    for (long i = 0; i < n; ++i) {
        const auto c = cell(sums[static_cast<std::size_t>(i)]);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({c.first + dx, c.second + dy});
                if (it == grid.end()) continue;
                for (long j : it->second)
                    if (j > i && std::abs(sums[static_cast<std::size_t>(i)] - sums[static_cast<std::size_t>(j)]) <= tol) {
                        const long a = find(i), b = find(j);
                        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
                    }
            }
    }
    std::map<long, std::vector<long>> groups;
    for (long i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<long>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

} // namespace detail

// Every coincident sum whose tuples disagree on f.  One entry per distinct
// (f_a, f_b) pair per coincidence cluster.
inline FeasibilityReport check_feasibility(const Constellation& c) {
    c.validate();
    const long n = tuple_count(c.M(), c.K(), kMaxEnumerableTuples);
    std::vector<cplx> sums(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) sums[static_cast<std::size_t>(i)] = c.superposition(i);
    FeasibilityReport rep;
    for (const auto& members : detail::cluster_sums(sums, c.collision_tolerance())) {
        std::map<double, long> first_tuple; // f -> representative tuple
        for (long i : members) first_tuple.emplace(c.table.values[static_cast<std::size_t>(i)], i);
        if (first_tuple.size() < 2) continue;
        for (auto a = first_tuple.begin(); a != first_tuple.end(); ++a)
            for (auto b = std::next(a); b != first_tuple.end(); ++b)
                rep.violations.push_back({a->first, b->first, sums[static_cast<std::size_t>(a->second)], a->second, b->second});
    }
    rep.feasible = rep.violations.empty();
    return rep;
}

struct SumPoint {
    cplx point{};
    double f = 0.0;
};

// Reachable superpositions with equal-f coincident points merged;
// demap() is nearest point, ties to the smallest f.
class SumConstellation {
public:
    SumConstellation() = default;
    explicit SumConstellation(std::vector<SumPoint> pts) : points_(std::move(pts)) {
        std::stable_sort(points_.begin(), points_.end(), [](const SumPoint& a, const SumPoint& b) { return a.f < b.f; });
    }

    const std::vector<SumPoint>& points() const { return points_; }

    double demap(cplx y) const {
        require(!points_.empty(), "empty sum constellation");
        double best_d = INFINITY, best_f = 0.0;
        for (const auto& p : points_) {
            const double d = std::norm(y - p.point);
            // sorted by f, so strict < keeps the smallest f on ties
            if (d < best_d * (1.0 - 1e-12)) {
                best_d = d;
                best_f = p.f;
            }
        }
        return best_f;
    }

private:
    std::vector<SumPoint> points_;
};

inline SumConstellation build_demapper(const Constellation& c) {
    const auto rep = check_feasibility(c);
    if (!rep.feasible) throw ConstraintViolation("infeasible constellation cannot be demapped");
    const long n = tuple_count(c.M(), c.K(), kMaxEnumerableTuples);
    std::vector<cplx> sums(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) sums[static_cast<std::size_t>(i)] = c.superposition(i);
    std::vector<SumPoint> pts;
    for (const auto& members : detail::cluster_sums(sums, c.collision_tolerance())) {
        cplx mean{};
        for (long i : members) mean += sums[static_cast<std::size_t>(i)];
        mean /= static_cast<double>(members.size());
        pts.push_back({mean, c.table.values[static_cast<std::size_t>(members[0])]});
    }
    return SumConstellation(std::move(pts));
}

// Achieved delta: min over pairs with differing f of |dS|^2 / |df|^2.
inline double achieved_delta(const Constellation& c) {
    const long n = tuple_count(c.M(), c.K(), kMaxEnumerableTuples);
    std::vector<cplx> sums(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) sums[static_cast<std::size_t>(i)] = c.superposition(i);
    double best = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) {
            const double df = c.table.values[static_cast<std::size_t>(i)] - c.table.values[static_cast<std::size_t>(j)];
            if (df == 0.0) continue;
            best = std::min(best, std::norm(sums[static_cast<std::size_t>(i)] - sums[static_cast<std::size_t>(j)]) / (df * df));
        }
    return best;
}

struct DesignOptions {
    int restarts = 32;
    int iterations = 400;
    int randomization_rounds = 200;
    bool tied = true;
    std::uint64_t seed = 1;
};

struct DesignResult {
    Constellation constellation;
    double delta = 0.0;
    bool feasible = false;
    bool unbounded = false; // no active constraints (constant table)
};

inline bool table_is_symmetric(const FunctionTable& t) {
    for (long i = 0; i < t.size(); ++i) {
        auto tup = t.tuple(i);
        std::sort(tup.begin(), tup.end());
        long j = 0, w = 1;
        for (int v : tup) {
            j += v * w;
            w *= t.M;
        }
        if (t.values[static_cast<std::size_t>(i)] != t.values[static_cast<std::size_t>(j)]) return false;
    }
    return true;
}

namespace detail {

// A constraint between two groups of tuples: their sums are written as
// count vectors over the free variables.
struct DesignPair {
    std::vector<std::pair<int, double>> diff; // sparse (variable, coefficient) of S_i - S_j
    double inv_df2 = 0.0;
};

inline double pair_ratio(const DesignPair& p, const CVec& x) {
    cplx d{};
    for (auto [v, c] : p.diff) d += c * x[static_cast<std::size_t>(v)];
    return std::norm(d) * p.inv_df2;
}

} // namespace detail

// Max-delta design over the smooth pairwise surrogate.  Projected gradient
// ascent on a log-sum-exp soft-min, random restarts, then Gaussian
// randomization around the incumbent.
inline DesignResult optimize_channelcomp(const FunctionTable& table, const std::vector<double>& budgets,
                                         DesignOptions opt = {}) {
    const int M = table.M, K = table.K;
    require(static_cast<int>(budgets.size()) == K, "budget count != K");
    for (double b : budgets) require(b > 0.0, "power budgets must be positive");
    tuple_count(M, K, kMaxDesignTuples);
    require(opt.restarts >= 1, "restarts must be >= 1");
    const bool tied = opt.tied && table_is_symmetric(table) &&
                      std::all_of(budgets.begin(), budgets.end(), [&](double b) { return b == budgets[0]; });

    // Free variables: M shared points (tied) or K*M points.
    const int nvar = tied ? M : K * M;
    auto var_of = [&](int k, int level) { return tied ? level : k * M + level; };
    auto budget_of = [&](int v) { return budgets[static_cast<std::size_t>(tied ? 0 : v / M)]; };

    // Distinct sum "shapes": count vectors over variables.  Tied designs collapse
    // permutations of a tuple into one shape.
    std::map<std::vector<int>, double> shapes;
    for (long i = 0; i < table.size(); ++i) {
        const auto tup = table.tuple(i);
        std::vector<int> cnt(static_cast<std::size_t>(nvar), 0);
        for (int k = 0; k < K; ++k) ++cnt[static_cast<std::size_t>(var_of(k, tup[static_cast<std::size_t>(k)]))];
        shapes.emplace(std::move(cnt), table.values[static_cast<std::size_t>(i)]);
    }
    std::vector<std::pair<std::vector<int>, double>> sv(shapes.begin(), shapes.end());
    std::vector<detail::DesignPair> pairs;
    for (std::size_t a = 0; a < sv.size(); ++a)
        for (std::size_t b = a + 1; b < sv.size(); ++b) {
            const double df = sv[a].second - sv[b].second;
            if (df == 0.0) continue;
            detail::DesignPair p;
            p.inv_df2 = 1.0 / (df * df);
            for (int v = 0; v < nvar; ++v) {
                const int c = sv[a].first[static_cast<std::size_t>(v)] - sv[b].first[static_cast<std::size_t>(v)];
                if (c != 0) p.diff.emplace_back(v, static_cast<double>(c));
            }
            pairs.push_back(std::move(p));
        }

    auto expand = [&](const CVec& x) {
        Constellation c;
        c.budgets = budgets;
        c.table = table;
        c.points.assign(static_cast<std::size_t>(K), CVec(static_cast<std::size_t>(M)));
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < M; ++l) c.points[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = x[static_cast<std::size_t>(var_of(k, l))];
        return c;
    };
    auto project = [&](CVec& x) {
        for (int v = 0; v < nvar; ++v) {
            const double r = std::sqrt(budget_of(v));
            auto& z = x[static_cast<std::size_t>(v)];
            if (std::abs(z) > r) z *= r / std::abs(z);
        }
    };
    auto min_ratio = [&](const CVec& x) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& p : pairs) m = std::min(m, detail::pair_ratio(p, x));
        return m;
    };

    Stream rng(opt.seed, 0, 0, Purpose::design);
    CVec start(static_cast<std::size_t>(nvar));

    if (pairs.empty()) {
        // No constraint is active: anything works.  Return a PAM spread.
        for (int v = 0; v < nvar; ++v) {
            const int level = v % M;
            start[static_cast<std::size_t>(v)] = M > 1 ? std::sqrt(budget_of(v)) * (2.0 * level / (M - 1) - 1.0) : 0.0;
        }
        return {expand(start), std::numeric_limits<double>::max(), true, true};
    }

    CVec best_x;
    double best = -1.0;
    std::vector<double> w(pairs.size());
    for (int r = 0; r < opt.restarts; ++r) {
        CVec x(static_cast<std::size_t>(nvar));
        for (int v = 0; v < nvar; ++v) {
            const double rad = std::sqrt(budget_of(v)) * std::sqrt(rng.uniform());
            x[static_cast<std::size_t>(v)] = std::polar(rad, rng.phase());
        }
        double step = 0.05;
        for (int it = 0; it < opt.iterations; ++it) {
            const double cur = std::max(min_ratio(x), 1e-12);
            const double beta = 30.0 / cur;
            double wsum = 0.0;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                w[p] = std::exp(-beta * (detail::pair_ratio(pairs[p], x) - cur));
                wsum += w[p];
            }
            CVec g(static_cast<std::size_t>(nvar), cplx{});
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                if (w[p] < 1e-12 * wsum) continue;
                cplx d{};
                for (auto [v, c] : pairs[p].diff) d += c * x[static_cast<std::size_t>(v)];
                const cplx gd = 2.0 * d * pairs[p].inv_df2 * (w[p] / wsum);
                for (auto [v, c] : pairs[p].diff) g[static_cast<std::size_t>(v)] += c * gd;
            }
            double gn = 0.0;
            for (cplx z : g) gn += std::norm(z);
            gn = std::sqrt(gn);
            if (gn == 0.0) break;
            CVec trial = x;
            for (int v = 0; v < nvar; ++v)
                trial[static_cast<std::size_t>(v)] += step * std::sqrt(budget_of(v)) * g[static_cast<std::size_t>(v)] / gn;
            project(trial);
            if (min_ratio(trial) >= cur) {
                x = std::move(trial);
                step = std::min(step * 1.2, 0.5);
            } else {
                step *= 0.6;
                if (step < 1e-7) break;
            }
        }
        const double d = min_ratio(x);
        if (d > best) {
            best = d;
            best_x = x;
        }
    }
    // Gaussian randomization around the incumbent.
    double sd = 0.05;
    for (int r = 0; r < opt.randomization_rounds; ++r) {
        CVec cand = best_x;
        for (int v = 0; v < nvar; ++v) cand[static_cast<std::size_t>(v)] += std::sqrt(budget_of(v)) * rng.complex_normal(sd * sd);
        project(cand);
        const double d = min_ratio(cand);
        if (d > best) {
            best = d;
            best_x = std::move(cand);
        } else if (r % 20 == 19) {
            sd *= 0.7;
        }
    }
    DesignResult res{expand(best_x), best, false, false};
    res.delta = achieved_delta(res.constellation);
    res.feasible = res.delta > 0.0 && check_feasibility(res.constellation).feasible;
    return res;
}

// Integer-lattice mapping: square QAM (M = q^2) places v mod q on I and v div q
// on Q; PAM (M <= q) places v on I.
class SumCompMap {
public:
    SumCompMap(int M, int q) : M_(M), q_(q) {
        require(M >= 1 && q >= 1, "bad SumComp parameters");
        if (M <= q) pam_ = true;
        else if (M == q * q) pam_ = false;
        else throw ConstraintViolation("SumComp needs M == q^2 or M <= q");
    }

    int levels() const { return M_; }
    int base() const { return q_; }
    bool pam() const { return pam_; }

    cplx map(int v) const {
        require(v >= 0 && v < M_, "SumComp level out of range");
        if (pam_) return {static_cast<double>(v), 0.0};
        return {static_cast<double>(v % q_), static_cast<double>(v / q_)};
    }

    // Mean symbol, for centering.
    cplx center() const {
        if (pam_) return {(M_ - 1) / 2.0, 0.0};
        return {(q_ - 1) / 2.0, (q_ - 1) / 2.0};
    }
    // Average energy of the centered symbol under uniform levels.
    double centered_energy() const {
        if (pam_) return (static_cast<double>(M_) * M_ - 1.0) / 12.0;
        return 2.0 * (static_cast<double>(q_) * q_ - 1.0) / 12.0;
    }

    // Round each axis onto the reachable lattice and recombine.
    long decode(cplx y, int K) const {
        if (pam_) return static_cast<long>(std::clamp(std::round(y.real()), 0.0, static_cast<double>(K) * (M_ - 1)));
        const double top = static_cast<double>(K) * (q_ - 1);
        const long i = static_cast<long>(std::clamp(std::round(y.real()), 0.0, top));
        const long qd = static_cast<long>(std::clamp(std::round(y.imag()), 0.0, top));
        return i + static_cast<long>(q_) * qd;
    }

private:
    int M_;
    int q_;
    bool pam_ = false;
};

inline cplx sumcomp_map(double reading, const Quantizer& quant, int q) {
    return SumCompMap(quant.levels(), q).map(quant.index(reading));
}

} // namespace aircomp
