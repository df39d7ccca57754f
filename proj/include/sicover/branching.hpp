#pragma once

#include <unordered_set>
#include <vector>

#include "sicover/boxgrid.hpp"
#include "sicover/parallel.hpp"

namespace sicover {

// ---------------------------------------------------------------------------
// Maximal separated packings ("predetermined rule" = greedy in lexicographic
// lower-corner order)
// ---------------------------------------------------------------------------

namespace branching_detail {

inline uint64_t lattice_key(const std::vector<long>& idx) {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (long v : idx) h = hash_combine(h, uint64_t(v) + 0x7f4a7c15u);
    return h;
}

inline bool lex_less(const std::vector<long>& a, const std::vector<long>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace branching_detail

/// Greedy maximal subset of same-level grid boxes with pairwise distances at
/// least one box side: equivalently no two selected boxes are grid neighbours
/// (Chebyshev index distance >= 2). Guarantees |output| >= |input| / 3^d.
inline std::vector<std::vector<long>> maximal_separated_subset(std::vector<std::vector<long>> boxes) {
    std::sort(boxes.begin(), boxes.end(), branching_detail::lex_less);
    std::unordered_set<uint64_t> accepted;
    std::vector<std::vector<long>> out;
    std::vector<long> probe;
    for (const auto& b : boxes) {
        const int d = int(b.size());
        bool blocked = false;
        probe.assign(b.begin(), b.end());
        std::vector<int> off(size_t(d), -1);
        while (!blocked) {
            for (int i = 0; i < d; ++i) probe[size_t(i)] = b[size_t(i)] + off[size_t(i)];
            if (accepted.count(branching_detail::lattice_key(probe))) blocked = true;
            int axis = 0;
            while (axis < d) {
                if (++off[size_t(axis)] <= 1) break;
                off[size_t(axis)] = -1;
                ++axis;
            }
            if (axis == d) break;
        }
        if (!blocked) {
            accepted.insert(branching_detail::lattice_key(b));
            out.push_back(b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generation records
// ---------------------------------------------------------------------------

struct GenerationRecord {
    int generation = 0;            // l
    long z = 0;                    // Z_l = |W_l|
    std::vector<long> per_parent;  // Z_{l,i}, offspring counts per parent
    bool truncated = false;        // parent cap was hit while expanding
};

struct EmbeddingRun {
    std::vector<GenerationRecord> generations;
    bool survived = false;
    bool truncated = false;
    int big_n = 0;
    int depth = 0;
    /// Witness chain (outermost to innermost) of one surviving line of boxes,
    /// absolute lattice indices; filled by the realization-driven engine.
    std::vector<std::vector<long>> witness_chain;
};

struct GrowthEstimate {
    bool defined = false;
    double mean_offspring = 0;
    double log2_rate = 0;
};

/// Mean offspring across surviving generations: sum Z_{l+1} / sum Z_l.
inline GrowthEstimate growth_rate_estimate(const EmbeddingRun& run) {
    GrowthEstimate g;
    double num = 0, den = 0;
    for (size_t i = 0; i + 1 < run.generations.size(); ++i) {
        if (run.generations[i].z == 0) break;
        den += double(run.generations[i].z);
        num += double(run.generations[i + 1].z);
    }
    if (den <= 0) return g;  // extinct at generation 1: undefined, flagged
    g.defined = true;
    g.mean_offspring = num / den;
    g.log2_rate = std::log2(std::max(g.mean_offspring, 1e-300));
    return g;
}

// ---------------------------------------------------------------------------
// Realization-driven embedding (exact witnesses, shallow depths)
// ---------------------------------------------------------------------------

/// The branching construction on one sampled realization: generation 1 packs
/// the untouched level-N boxes, generation l+1 packs the children of each
/// W_l box untouched by the diameter band (2^-(l+1)N, 2^-lN]. Requires
/// realization depth >= N*L.
inline EmbeddingRun run_embedding(const ProcessRealization& r, int big_n, int depth_l,
                                  bool packed = true) {
    if (big_n < 1 || depth_l < 1) throw std::invalid_argument("run_embedding: N and L must be >= 1");
    if (r.depth < big_n * depth_l)
        throw std::invalid_argument("run_embedding: realization depth below N*L");
    EmbeddingRun run;
    run.big_n = big_n;
    run.depth = depth_l;

    BoxClassification c1 = classify_boxes(r, big_n);
    std::vector<std::vector<long>> gen;
    const long cells = 1l << big_n;
    std::vector<long> idx(size_t(r.dim), 0);
    while (true) {
        size_t flat = 0;
        for (int i = r.dim - 1; i >= 0; --i) flat = (flat << big_n) | size_t(idx[size_t(i)]);
        if (c1.status[flat] == uint8_t(BoxStatus::Untouched)) gen.push_back(idx);
        int axis = 0;
        while (axis < r.dim) {
            if (++idx[size_t(axis)] < cells) break;
            idx[size_t(axis)] = 0;
            ++axis;
        }
        if (axis == r.dim) break;
    }
    if (packed) gen = maximal_separated_subset(std::move(gen));
    GenerationRecord g1;
    g1.generation = 1;
    g1.z = long(gen.size());
    g1.per_parent = {g1.z};
    run.generations.push_back(g1);

    std::vector<std::vector<long>> parents = gen;
    for (int l = 1; l < depth_l && !parents.empty(); ++l) {
        GenerationRecord rec;
        rec.generation = l + 1;
        std::vector<std::vector<long>> next;
        for (const auto& p : parents) {
            auto kids = subbox_untouched(r, p, l * big_n, (l + 1) * big_n, l * big_n + 1, (l + 1) * big_n);
            if (packed) kids = maximal_separated_subset(std::move(kids));
            rec.per_parent.push_back(long(kids.size()));
            for (auto& k : kids) next.push_back(std::move(k));
        }
        rec.z = long(next.size());
        run.generations.push_back(rec);
        parents.swap(next);
    }
    run.survived = !run.generations.empty() && run.generations.back().generation == depth_l &&
                   run.generations.back().z > 0;
    if (run.survived && !parents.empty()) {
        std::vector<long> leaf = parents.front();
        for (int l = depth_l; l >= 1; --l) {
            run.witness_chain.push_back(leaf);
            for (auto& v : leaf) v >>= big_n;
        }
        std::reverse(run.witness_chain.begin(), run.witness_chain.end());
    }
    return run;
}

// ---------------------------------------------------------------------------
// Rescaled recursion (production survival probes, any depth)
// ---------------------------------------------------------------------------

enum class SurvivalRule {
    UntouchedPacked,  // the branching construction (generation = packed untouched)
    UntouchedAll,     // nested untouched boxes, no packing (monotone under thinning)
    NotCovered,       // nested not-singly-covered boxes (exact M-recursion)
};

struct SurvivalConfig {
    ScaleInvariantMeasure measure;
    double lambda_base = 1.0;  // sampling intensity (coupling marks drawn here)
    int big_n = 3;             // N: levels per generation
    int depth = 6;             // L: generations
    uint64_t seed = 1;
    SurvivalRule rule = SurvivalRule::UntouchedPacked;
    long parent_cap = 256;  // per-generation cap for the breadth-first engine
};

namespace branching_detail {

/// Sample the node-local band process (depth N in the unit window) at the
/// base intensity thinned down to `lambda` via the shared arrival marks: the
/// cost is proportional to lambda, not to the coupling base.
inline ProcessRealization node_sample(const SurvivalConfig& cfg, uint64_t node_digest, double lambda) {
    SampleConfig sc;
    sc.measure = cfg.measure;
    sc.lambda = cfg.lambda_base;
    sc.depth = cfg.big_n;
    sc.window = AxisBox::unit(cfg.measure.dim);
    sc.seed = node_digest;
    return sample_process_cut(sc, 0, std::min(1.0, lambda / cfg.lambda_base));
}

/// One expanded node of the recursion: kept child boxes plus, for the
/// not-covered rule, the outer sets carried into each kept child (collected in
/// a single pass over the sets, bucketed by their bounding boxes).
struct NodeExpansion {
    std::vector<std::vector<long>> boxes;
    std::vector<std::vector<PlacedSet>> carried;  // aligned with boxes (NotCovered)
};

inline NodeExpansion expand_node(const SurvivalConfig& cfg, uint64_t digest, double lambda,
                                 const std::vector<PlacedSet>& carried_in) {
    const int d = cfg.measure.dim;
    const int N = cfg.big_n;
    ProcessRealization r = node_sample(cfg, digest, lambda);
    if (cfg.rule == SurvivalRule::NotCovered && !carried_in.empty())
        for (const auto& g : carried_in) r.bands[0].push_back(g);
    BoxClassification c = classify_boxes(r, N);

    NodeExpansion out;
    const long cells = 1l << N;
    std::vector<long> idx(size_t(d), 0);
    std::vector<int32_t> slot(c.status.size(), -1);
    while (true) {
        size_t flat = 0;
        for (int i = d - 1; i >= 0; --i) flat = (flat << N) | size_t(idx[size_t(i)]);
        bool keep = cfg.rule == SurvivalRule::NotCovered
                        ? c.status[flat] != uint8_t(BoxStatus::Covered)
                        : c.status[flat] == uint8_t(BoxStatus::Untouched);
        if (keep) {
            slot[flat] = int32_t(out.boxes.size());
            out.boxes.push_back(idx);
        }
        int axis = 0;
        while (axis < d) {
            if (++idx[size_t(axis)] < cells) break;
            idx[size_t(axis)] = 0;
            ++axis;
        }
        if (axis == d) break;
    }
    if (cfg.rule == SurvivalRule::UntouchedPacked)
        out.boxes = maximal_separated_subset(std::move(out.boxes));

    if (cfg.rule == SurvivalRule::NotCovered) {
        out.carried.resize(out.boxes.size());
        const double side = std::pow(2.0, -N);
        const double up = std::pow(2.0, N);
        r.for_each([&](const PlacedSet& g) {
            AxisBox bb = g.bounding_box();
            long lo[kMaxDim], hi[kMaxDim];
            for (int i = 0; i < d; ++i) {
                lo[i] = std::max<long>(0, long(std::floor(bb.lo[i] / side)));
                hi[i] = std::min<long>(cells - 1, long(std::floor(bb.hi[i] / side)));
                if (lo[i] > hi[i]) return;
            }
            long it[kMaxDim];
            for (int i = 0; i < d; ++i) it[i] = lo[i];
            while (true) {
                size_t flat = 0;
                for (int i = d - 1; i >= 0; --i) flat = (flat << N) | size_t(it[i]);
                int32_t s = slot[flat];
                if (s >= 0) {
                    AxisBox child_box;
                    child_box.lo = Vec::zero(d);
                    child_box.hi = Vec::zero(d);
                    for (int i = 0; i < d; ++i) {
                        child_box.lo[i] = it[i] * side;
                        child_box.hi[i] = child_box.lo[i] + side;
                    }
                    if (touches_box(g, child_box)) {
                        PlacedSet t = g;
                        t.rho = g.rho * up;
                        t.pos = (g.pos - child_box.lo) * up;
                        out.carried[size_t(s)].push_back(t);
                    }
                }
                int axis = 0;
                while (axis < d) {
                    if (++it[axis] <= hi[axis]) break;
                    it[axis] = lo[axis];
                    ++axis;
                }
                if (axis == d) break;
            }
        });
        // packing applies before carrying only for untouched rules; for
        // NotCovered the slots already match out.boxes
    }
    return out;
}

struct DfsContext {
    const SurvivalConfig* cfg = nullptr;
    double lambda = 0;
    long budget = 0;
    bool exhausted = false;
};

/// Depth-first: does any nested chain from this node reach generation L?
/// Children are explored in deterministic order and the search exits on the
/// first surviving chain.
inline bool dfs_survives(DfsContext& ctx, uint64_t digest, const std::vector<PlacedSet>& carried,
                         int gen) {
    const SurvivalConfig& cfg = *ctx.cfg;
    if (--ctx.budget < 0) {
        ctx.exhausted = true;
        return false;
    }
    NodeExpansion node = expand_node(cfg, digest, ctx.lambda, carried);
    if (node.boxes.empty()) return false;
    if (gen == cfg.depth) return true;
    static const std::vector<PlacedSet> kNoCarry;
    for (size_t i = 0; i < node.boxes.size(); ++i) {
        uint64_t child = hash_combine(digest, lattice_key(node.boxes[i]));
        const auto& child_carried =
            cfg.rule == SurvivalRule::NotCovered ? node.carried[i] : kNoCarry;
        if (dfs_survives(ctx, child, child_carried, gen + 1)) return true;
        if (ctx.exhausted) return false;
    }
    return false;
}

}  // namespace branching_detail

/// Breadth-first survival probe with full generation records.
inline EmbeddingRun survival_probe(const SurvivalConfig& cfg, double lambda, uint64_t replicate,
                                   bool record_per_parent = false) {
    if (lambda > cfg.lambda_base + 1e-12)
        throw std::invalid_argument("survival_probe: lambda exceeds the coupling base intensity");
    const int d = cfg.measure.dim;
    const int N = cfg.big_n;
    if (size_t(d) * size_t(N) > 26) throw std::invalid_argument("survival_probe: N too large");
    EmbeddingRun run;
    run.big_n = N;
    run.depth = cfg.depth;

    struct NodeState {
        uint64_t digest = 0;
        std::vector<PlacedSet> carried;
    };
    uint64_t root = StreamKey{cfg.seed, replicate, 0, 0, 0x5eedu}.digest();
    std::vector<NodeState> parents = {{root, {}}};

    for (int l = 0; l < cfg.depth && !parents.empty(); ++l) {
        GenerationRecord rec;
        rec.generation = l + 1;
        std::vector<NodeState> next;
        for (const auto& parent : parents) {
            auto node = branching_detail::expand_node(cfg, parent.digest, lambda, parent.carried);
            if (record_per_parent || l == 0) rec.per_parent.push_back(long(node.boxes.size()));
            rec.z += long(node.boxes.size());
            for (size_t i = 0; i < node.boxes.size(); ++i) {
                if (long(next.size()) >= cfg.parent_cap) {
                    rec.truncated = true;
                    run.truncated = true;
                    break;
                }
                NodeState ns;
                ns.digest = hash_combine(parent.digest, branching_detail::lattice_key(node.boxes[i]));
                if (cfg.rule == SurvivalRule::NotCovered) ns.carried = std::move(node.carried[i]);
                next.push_back(std::move(ns));
            }
        }
        run.generations.push_back(rec);
        parents.swap(next);
        if (rec.z == 0) break;
    }
    run.survived = int(run.generations.size()) == cfg.depth && run.generations.back().z > 0;
    return run;
}

/// Survival bit only, via depth-first early exit; same law as the
/// breadth-first probe with an unbounded cap.
inline bool survives(const SurvivalConfig& cfg, double lambda, uint64_t replicate,
                     long node_budget = 200000, bool* budget_exhausted = nullptr) {
    if (lambda <= 0) return true;  // empty process: every box stays untouched
    branching_detail::DfsContext ctx;
    ctx.cfg = &cfg;
    ctx.lambda = lambda;
    ctx.budget = node_budget;
    uint64_t root = StreamKey{cfg.seed, replicate, 0, 0, 0x5eedu}.digest();
    bool ok = branching_detail::dfs_survives(ctx, root, {}, 1);
    if (budget_exhausted) *budget_exhausted = *budget_exhausted || ctx.exhausted;
    return ok;
}

/// Survival frequency over R replicates (parallel, replicate-keyed streams).
inline double survival_frequency(const SurvivalConfig& cfg, double lambda, long replicates,
                                 int max_threads = 0) {
    std::vector<uint8_t> ok(size_t(replicates), 0);
    parallel_for(replicates, [&](long i) {
        ok[size_t(i)] = survives(cfg, lambda, uint64_t(i)) ? 1 : 0;
    }, max_threads);
    long s = 0;
    for (uint8_t v : ok) s += v;
    return double(s) / double(replicates);
}

}  // namespace sicover
