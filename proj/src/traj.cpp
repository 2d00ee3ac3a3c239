#include "mobility/traj.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "mobility/errors.hpp"

namespace mobility {

std::vector<Displacement> extract_displacements(const Trajectory& traj,
                                                const AntennaRegistry& reg) {
    std::vector<Displacement> out;
    for (size_t k = 1; k < traj.events.size(); ++k) {
        const CdrEvent& a = traj.events[k - 1];
        const CdrEvent& b = traj.events[k];
        if (a.antenna == b.antenna) continue;
        Displacement d;
        d.user_id = traj.user_id;
        d.t_start = a.timestamp;
        d.t_end = b.timestamp;
        d.origin = a.antenna;
        d.destination = b.antenna;
        d.distance_km = haversine_km(reg.position(a.antenna), reg.position(b.antenna));
        out.push_back(std::move(d));
    }
    return out;
}

GyrationSample radius_of_gyration(const Trajectory& traj, const AntennaRegistry& reg) {
    if (traj.events.empty()) throw ValidationError("empty trajectory");
    const Projection proj(reg.centroid());
    double cx = 0.0, cy = 0.0;
    std::vector<XY> pts;
    pts.reserve(traj.events.size());
    for (const auto& e : traj.events) {
        pts.push_back(proj.project(reg.position(e.antenna)));
        cx += pts.back().x;
        cy += pts.back().y;
    }
    const double n = static_cast<double>(pts.size());
    cx /= n;
    cy /= n;
    double acc = 0.0;
    for (const auto& p : pts) {
        const double dx = p.x - cx, dy = p.y - cy;
        acc += dx * dx + dy * dy;
    }
    return {traj.user_id, std::sqrt(acc / n), static_cast<int>(pts.size())};
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

bool is_weekend(std::int64_t local_ts) {
    const std::int64_t day = floor_div(local_ts, 86400);
    const std::int64_t wd = ((day % 7) + 7) % 7;  // 0 = Thursday (1970-01-01)
    return wd == 2 || wd == 3;                    // Saturday, Sunday
}

struct PairObs {
    std::int64_t day;
    int minute_of_day;
    bool displaced;
    double distance_km;
};

// walks consecutive pairs of every trajectory, applying the gap and weekday
// filters; the window key is the FIRST call's start
template <typename F>
void for_each_pair(const std::vector<Trajectory>& trajs, const AntennaRegistry& reg,
                   const ProfileOptions& opt, F&& f) {
    const std::int64_t off = static_cast<std::int64_t>(opt.utc_offset_hours) * 3600;
    for (const auto& traj : trajs) {
        for (size_t k = 1; k < traj.events.size(); ++k) {
            const CdrEvent& a = traj.events[k - 1];
            const CdrEvent& b = traj.events[k];
            const std::int64_t gap = b.timestamp - a.timestamp;
            if (gap <= 0 || gap > opt.max_gap_seconds) continue;
            const std::int64_t local = a.timestamp + off;
            if (opt.weekdays_only && is_weekend(local)) continue;
            PairObs obs;
            obs.day = floor_div(local, 86400);
            obs.minute_of_day =
                static_cast<int>((local - obs.day * 86400) / 60);
            obs.displaced = a.antenna != b.antenna;
            obs.distance_km =
                obs.displaced
                    ? haversine_km(reg.position(a.antenna), reg.position(b.antenna))
                    : 0.0;
            f(obs);
        }
    }
}

// counts per (day, window): numerators per bin plus the shared denominator
struct WindowCounts {
    std::vector<std::vector<double>> num;  // [bin][window]
    std::vector<double> den;               // [window]
};

template <typename Classify>
std::map<std::int64_t, WindowCounts> accumulate(const std::vector<Trajectory>& trajs,
                                                const AntennaRegistry& reg,
                                                const ProfileOptions& opt,
                                                int n_bins, Classify&& classify) {
    const int n_win = 1440 / opt.step_minutes;
    std::map<std::int64_t, WindowCounts> days;
    for_each_pair(trajs, reg, opt, [&](const PairObs& obs) {
        auto& wc = days[obs.day];
        if (wc.den.empty()) {
            wc.num.assign(n_bins, std::vector<double>(n_win, 0.0));
            wc.den.assign(n_win, 0.0);
        }
        for (int w = 0; w < n_win; ++w) {
            const int start = w * opt.step_minutes;
            const int rel = ((obs.minute_of_day - start) % 1440 + 1440) % 1440;
            if (rel >= opt.window_minutes) continue;
            wc.den[w] += 1.0;
            classify(obs, wc.num, w);
        }
    });
    return days;
}

TemporalProfile finalize(const std::map<std::int64_t, WindowCounts>& days,
                         const ProfileOptions& opt, int bin, ProfileKind kind) {
    const int n_win = 1440 / opt.step_minutes;
    TemporalProfile prof;
    prof.window_minutes = opt.window_minutes;
    prof.step_minutes = opt.step_minutes;
    prof.kind = kind;
    prof.values.assign(n_win, std::nullopt);
    for (int w = 0; w < n_win; ++w) {
        if (opt.pool_days) {
            double num = 0.0, den = 0.0;
            for (const auto& [day, wc] : days) {
                num += wc.num[bin][w];
                den += wc.den[w];
            }
            if (den > 0.0) prof.values[w] = num / den;
        } else {
            double acc = 0.0;
            int n_days = 0;
            for (const auto& [day, wc] : days) {
                if (wc.den[w] > 0.0) {
                    acc += wc.num[bin][w] / wc.den[w];
                    ++n_days;
                }
            }
            if (n_days > 0) prof.values[w] = acc / n_days;
        }
    }
    return prof;
}

}  // namespace

TemporalProfile displacement_probability_profile(const std::vector<Trajectory>& trajs,
                                                 const AntennaRegistry& reg,
                                                 const ProfileOptions& opt) {
    auto days = accumulate(trajs, reg, opt, 1,
                           [](const PairObs& obs, std::vector<std::vector<double>>& num,
                              int w) {
                               if (obs.displaced) num[0][w] += 1.0;
                           });
    return finalize(days, opt, 0, ProfileKind::DisplacementProbability);
}

TemporalProfile mean_distance_profile(const std::vector<Trajectory>& trajs,
                                      const AntennaRegistry& reg,
                                      const ProfileOptions& opt) {
    // numerator: summed distance; denominator: displaced pair count
    const int n_win = 1440 / opt.step_minutes;
    std::map<std::int64_t, WindowCounts> days;
    for_each_pair(trajs, reg, opt, [&](const PairObs& obs) {
        if (!obs.displaced) return;
        auto& wc = days[obs.day];
        if (wc.den.empty()) {
            wc.num.assign(1, std::vector<double>(n_win, 0.0));
            wc.den.assign(n_win, 0.0);
        }
        for (int w = 0; w < n_win; ++w) {
            const int start = w * opt.step_minutes;
            const int rel = ((obs.minute_of_day - start) % 1440 + 1440) % 1440;
            if (rel >= opt.window_minutes) continue;
            wc.den[w] += 1.0;
            wc.num[0][w] += obs.distance_km;
        }
    });
    return finalize(days, opt, 0, ProfileKind::MeanDistanceKm);
}

std::vector<TemporalProfile> distance_binned_profiles(
    const std::vector<Trajectory>& trajs, const AntennaRegistry& reg,
    const std::vector<DistanceBin>& bins, const ProfileOptions& opt) {
    for (size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].hi_km <= bins[i].lo_km)
            throw ValidationError("empty distance bin");
        if (i > 0 && bins[i].lo_km < bins[i - 1].hi_km)
            throw ValidationError("distance bins must be disjoint and ascending");
    }
    const int n_bins = static_cast<int>(bins.size());
    auto days = accumulate(
        trajs, reg, opt, n_bins,
        [&](const PairObs& obs, std::vector<std::vector<double>>& num, int w) {
            if (!obs.displaced) return;
            for (int b = 0; b < n_bins; ++b)
                if (obs.distance_km >= bins[b].lo_km && obs.distance_km < bins[b].hi_km) {
                    num[b][w] += 1.0;
                    break;
                }
        });
    std::vector<TemporalProfile> out;
    out.reserve(bins.size());
    for (int b = 0; b < n_bins; ++b) {
        auto prof = finalize(days, opt, b, ProfileKind::DisplacementProbability);
        prof.bin_lo_km = bins[b].lo_km;
        prof.bin_hi_km = bins[b].hi_km;
        out.push_back(std::move(prof));
    }
    return out;
}

std::string profiles_csv(const std::vector<TemporalProfile>& profiles) {
    std::ostringstream ss;
    ss << "window_start_min,statistic,kind,bin_lo_km,bin_hi_km\n";
    for (const auto& p : profiles) {
        const char* kind = p.kind == ProfileKind::DisplacementProbability
                               ? "displacement_probability"
                               : "mean_distance_km";
        for (int w = 0; w < p.n_windows(); ++w) {
            ss << p.window_start_minute(w) << ",";
            if (p.values[w]) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.9g", *p.values[w]);
                ss << buf;
            }
            ss << "," << kind << ",";
            if (p.bin_lo_km) ss << *p.bin_lo_km;
            ss << ",";
            if (p.bin_hi_km) ss << *p.bin_hi_km;
            ss << "\n";
        }
    }
    return ss.str();
}

}  // namespace mobility
