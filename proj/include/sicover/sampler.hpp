#pragma once

#include <ostream>
#include <vector>

#include "sicover/measure.hpp"
#include "sicover/rng.hpp"

namespace sicover {

/// Configuration of one Poisson sampling run of Phi_{lambda,n} near a window.
struct SampleConfig {
    ScaleInvariantMeasure measure;
    double lambda = 1.0;
    int depth = 6;  // keep diameters in [2^-depth, 1)
    AxisBox window = AxisBox::unit(2);
    uint64_t seed = 1;
    double anchor_margin = 1.0;
    /// Anchors farther than a band's top diameter from the window cannot
    /// produce window-intersecting sets, so by default each band samples on
    /// the window enlarged by min(anchor_margin, band top diameter). Setting
    /// this false uses the blanket anchor_margin for every band (used by the
    /// edge-correction rejection test).
    bool exact_band_margins = true;

    double band_margin(int l) const {
        if (!exact_band_margins) return anchor_margin;
        return std::min(anchor_margin, std::pow(2.0, -l + 1));
    }

    void validate() const {
        if (lambda < 0) throw std::invalid_argument("sample config: lambda must be nonnegative");
        if (depth < 1) throw std::invalid_argument("sample config: depth >= 1");
        if (anchor_margin < 1.0) throw std::invalid_argument("sample config: anchor margin >= 1 required");
        if (!measure.base.samplable())
            throw std::invalid_argument("sample config: measure has zero-volume or reference atoms");
        if (window.dim() != measure.dim) throw std::invalid_argument("sample config: window dimension mismatch");
    }
};

/// One sampled realization, stratified by dyadic diameter bands
/// (band l holds diameters in [2^-l, 2^-l+1)).
struct ProcessRealization {
    double lambda = 0;       // intensity this realization represents
    double mark_lambda = 0;  // intensity at which coupling marks were drawn
    int depth = 0;
    int dim = 2;
    uint64_t seed = 0;
    uint64_t replicate = 0;
    std::vector<std::vector<PlacedSet>> bands;  // bands[l-1] holds band l

    size_t total_count() const {
        size_t n = 0;
        for (const auto& b : bands) n += b.size();
        return n;
    }
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const auto& b : bands)
            for (const auto& g : b) fn(g);
    }
};

/// Exact Poisson mean used for band l of the given config.
inline double expected_band_count(const SampleConfig& cfg, int l) {
    if (l < 1 || l > cfg.depth) throw std::invalid_argument("expected_band_count: band out of range");
    const double win = cfg.window.enlarged(cfg.band_margin(l)).volume();
    double mean = 0;
    for (const auto& a : cfg.measure.base.atoms)
        mean += cfg.lambda * a.weight * cfg.measure.band_scale_mass(l) * win;
    return mean;
}

/// Sample one band of the process into `out`, using streams keyed by
/// (seed, replicate, band, atom, set index). Coupling marks are generated as
/// the arrival positions of a unit-interval Poisson process, so thinning to a
/// fraction f of the intensity truncates the same arrival sequence at f: a
/// probe at a lower intensity can stop early (mark_cut < 1) and never pays
/// for the sets it would discard.
inline void sample_band(const SampleConfig& cfg, int l, uint64_t replicate,
                        std::vector<PlacedSet>& out, double mark_cut = 1.0) {
    const int d = cfg.measure.dim;
    const AxisBox win = cfg.window.enlarged(cfg.band_margin(l));
    const double blo = std::pow(2.0, -l), bhi = std::pow(2.0, -l + 1);
    const double blo_pow = std::pow(blo, -d), bhi_pow = std::pow(bhi, -d);
    for (size_t ai = 0; ai < cfg.measure.base.atoms.size(); ++ai) {
        const auto& atom = cfg.measure.base.atoms[ai];
        const double rate = cfg.lambda * atom.weight * cfg.measure.band_scale_mass(l) * win.volume();
        if (rate <= 0) continue;
        const StreamKey band_key{cfg.seed, replicate, uint64_t(l), ai, 0};
        Rng gaps(band_key);
        double mark = 0;
        for (uint64_t i = 0;; ++i) {
            mark += -std::log(1.0 - gaps.u01()) / rate;
            if (mark >= mark_cut) break;
            Rng rng(hash_combine(band_key.digest(), i + 1));
            PlacedSet g;
            g.tmpl = atom.shape;
            g.atom = int(ai);
            g.mark = mark;
            // inverse CDF of rho^-(d+1) drho restricted to [blo, bhi)
            const double u = rng.u01();
            g.rho = std::pow(blo_pow - u * (blo_pow - bhi_pow), -1.0 / d);
            g.pos = Vec::zero(d);
            for (int q = 0; q < d; ++q) g.pos[q] = rng.uniform(win.lo[q], win.hi[q]);
            g.theta = cfg.measure.base.rotation == RotationKernel::Uniform2D ? rng.uniform(0.0, 2 * kPi) : 0.0;
            out.push_back(g);
        }
    }
}

/// Sample Phi_{lambda,n} restricted to sets that can meet the window. A
/// mark_cut below one directly materializes the thinning of the cfg.lambda
/// process to intensity cfg.lambda * mark_cut.
inline ProcessRealization sample_process_cut(const SampleConfig& cfg, uint64_t replicate,
                                             double mark_cut) {
    cfg.validate();
    ProcessRealization r;
    r.lambda = cfg.lambda * mark_cut;
    r.mark_lambda = cfg.lambda;
    r.depth = cfg.depth;
    r.dim = cfg.measure.dim;
    r.seed = cfg.seed;
    r.replicate = replicate;
    r.bands.resize(size_t(cfg.depth));
    for (int l = 1; l <= cfg.depth; ++l)
        sample_band(cfg, l, replicate, r.bands[size_t(l - 1)], mark_cut);
    return r;
}

inline ProcessRealization sample_process(const SampleConfig& cfg, uint64_t replicate = 0) {
    return sample_process_cut(cfg, replicate, 1.0);
}

/// Independent thinning to a lower intensity via the stored coupling marks:
/// retain a set iff mark < lambda_new / mark_lambda. The output is a subset of
/// the input and is distributed as sample_process at lambda_new.
inline ProcessRealization thin_process(const ProcessRealization& r, double lambda_new) {
    if (lambda_new > r.lambda + 1e-15)
        throw std::invalid_argument("thin_process: can only thin to a smaller intensity");
    ProcessRealization out = r;
    out.lambda = lambda_new;
    const double keep = lambda_new / r.mark_lambda;
    for (auto& band : out.bands) {
        std::vector<PlacedSet> kept;
        kept.reserve(band.size());
        for (const auto& g : band)
            if (g.mark < keep) kept.push_back(g);
        band.swap(kept);
    }
    return out;
}

/// JSON-lines dump: a header object echoing the config, then one object per
/// placed set (family id, rho, theta, position).
inline void dump_realization(std::ostream& os, const SampleConfig& cfg, const ProcessRealization& r) {
    os << "{\"type\":\"header\",\"family\":\"" << cfg.measure.name << "\",\"dim\":" << r.dim
       << ",\"lambda\":" << r.lambda << ",\"depth\":" << r.depth << ",\"seed\":" << r.seed
       << ",\"replicate\":" << r.replicate << ",\"count\":" << r.total_count() << "}\n";
    int l = 0;
    for (const auto& band : r.bands) {
        ++l;
        for (const auto& g : band) {
            os << "{\"band\":" << l << ",\"family\":\"" << shape_kind_name(g.tmpl->kind())
               << "\",\"rho\":" << g.rho << ",\"theta\":" << g.theta << ",\"x\":[";
            for (int i = 0; i < g.dim(); ++i) os << (i ? "," : "") << g.pos[i];
            os << "]}\n";
        }
    }
}

}  // namespace sicover
