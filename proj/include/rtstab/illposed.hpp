#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtstab/synthesis.hpp"

namespace rtstab {

/// Target of the Hadamard demonstration: solutions whose H^j data shrink like
/// 1/n while the H^k norm at time T0 stays above alpha.
struct IllposedDemoSpec {
    int obs_order = 0;        // k
    int data_order = 2;       // j >= k
    double amplitude_target = 1.0;  // alpha
    double time_target = 1.0;       // T0
    int seq_length = 5;             // n_max
    double search_start = 1.0;      // first annulus left edge tried
    double search_cap = 4096.0;     // doubling search limit on R
    int radial_nodes = 32;

    void validate() const {
        if (obs_order < 0 || data_order < obs_order)
            throw std::invalid_argument("IllposedDemoSpec: need j >= k >= 0");
        if (data_order > 4)
            throw std::invalid_argument(
                "IllposedDemoSpec: data order capped at 4 by the derivative closures");
        if (!(amplitude_target > 0.0) || !(time_target > 0.0))
            throw std::invalid_argument("IllposedDemoSpec: alpha and T0 must be > 0");
        if (seq_length < 1) throw std::invalid_argument("IllposedDemoSpec: n_max must be >= 1");
        if (!(search_start > 0.0) || !(search_cap >= search_start))
            throw std::invalid_argument("IllposedDemoSpec: bad search limits");
    }
};

struct DemoSequenceEntry {
    int n = 0;
    double annulus_left = 0.0;   // R(n); the annulus is [R(n), R(n)+1]
    double amplitude = 0.0;      // bump amplitude after normalization
    double initial_norm = 0.0;   // ||(eta, v, q)(0)||_{H^j}, equals 1/n by construction
    double final_norm = 0.0;     // ||eta(T0)||_{H^k}
    double final_v_norm = 0.0;   // ||v(T0)||_{H^k}
    double growth_min = 0.0;     // min lambda over the annulus nodes
    double growth_max = 0.0;
    bool pass = false;
    std::string note;
};

struct SequenceReport {
    IllposedDemoSpec spec;
    std::vector<DemoSequenceEntry> entries;
    bool all_pass = false;
};

/// Shared eigensolve cache: one bank per tried annulus, reused across n.
class IllposedSearch {
  public:
    IllposedSearch(const SteadyProfile& prof, const VerticalGrid& grid)
        : prof_(&prof), grid_(&grid) {
        if (!(prof.density_jump() > 0.0))
            throw std::invalid_argument("IllposedSearch: configuration is stable, no growth");
    }

    /// Doubling search on R: the first annulus [R, R+1] whose slowest mode
    /// still grows at rate >= 1 and whose normalized solution reaches the
    /// target is returned.  The data norm is the measured frequency-space
    /// H^j norm of the triple, scaled to exactly 1/n.
    DemoSequenceEntry build_entry(const IllposedDemoSpec& spec, int n) {
        spec.validate();
        const int j_max = std::max(spec.data_order, spec.obs_order);
        DemoSequenceEntry best;
        best.n = n;
        for (double R = spec.search_start; R <= spec.search_cap; R *= 2.0) {
            DemoSequenceEntry e;
            e.n = n;
            e.annulus_left = R;
            const ModeBank* bank_ptr = nullptr;
            try {
                bank_ptr = &bank_at(R, j_max, spec.radial_nodes);
            } catch (const std::invalid_argument& ex) {
                e.note = ex.what();
                if (best.note.empty()) best = e;
                continue;
            }
            const ModeBank& bank = *bank_ptr;
            e.growth_min = bank.min_growth();
            e.growth_max = bank.max_growth();
            if (e.growth_min < 1.0) {
                e.note = "slowest annulus mode below rate 1";
                if (best.note.empty()) best = e;
                continue;
            }
            const auto init_all = hk_norm_trace(bank, spec.data_order, {0.0});
            const double data_norm = std::sqrt(init_all.eta_sq[0]) +
                                     std::sqrt(init_all.v_sq[0]) +
                                     std::sqrt(init_all.q_sq[0]);
            const auto final_tr = hk_norm_trace(bank, spec.obs_order, {spec.time_target});
            const double unit_final = std::sqrt(final_tr.eta_sq[0]);
            const double unit_final_v = std::sqrt(final_tr.v_sq[0]);
            // every norm is homogeneous of degree one in the bump amplitude
            e.amplitude = 1.0 / (n * data_norm);
            e.initial_norm = e.amplitude * data_norm;
            e.final_norm = e.amplitude * unit_final;
            e.final_v_norm = e.amplitude * unit_final_v;
            e.pass = e.final_norm >= spec.amplitude_target;
            if (e.pass) return e;
            if (e.final_norm > best.final_norm) {
                best = e;
                best.note = "target amplitude not reached";
            }
        }
        if (best.note.empty()) best.note = "search cap exceeded";
        best.pass = false;
        return best;
    }

    SequenceReport verify_sequence(const IllposedDemoSpec& spec) {
        SequenceReport rep;
        rep.spec = spec;
        rep.all_pass = true;
        for (int n = 1; n <= spec.seq_length; ++n) {
            rep.entries.push_back(build_entry(spec, n));
            rep.all_pass = rep.all_pass && rep.entries.back().pass;
        }
        return rep;
    }

  private:
    const ModeBank& bank_at(double R, int j_max, int radial_nodes) {
        const auto key = std::make_pair(R, j_max);
        auto it = banks_.find(key);
        if (it != banks_.end()) return *it->second;
        FrequencyProfile fp;
        fp.R2 = R;
        fp.R3 = R + 1.0;  // annulus width fixed at 1
        fp.amplitude = 1.0;
        fp.radial_nodes = radial_nodes;
        auto bank = std::make_shared<ModeBank>(*prof_, *grid_, fp, j_max);
        banks_.emplace(key, bank);
        return *bank;
    }

    const SteadyProfile* prof_;
    const VerticalGrid* grid_;
    std::map<std::pair<double, int>, std::shared_ptr<ModeBank>> banks_;
};

inline SequenceReport verify_sequence(const SteadyProfile& prof, const VerticalGrid& grid,
                                      const IllposedDemoSpec& spec) {
    IllposedSearch search(prof, grid);
    return search.verify_sequence(spec);
}

}  // namespace rtstab
