#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <string>

#include <json.hpp>

#include "dpupdate.hpp"
#include "solver.hpp"

namespace incprune {

using Json = nlohmann::ordered_json;

/// Wall times are reported in seconds at millisecond resolution.
inline double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

inline Json phase_json(std::uint64_t lp, std::uint64_t constraints, double seconds) {
    return Json{{"lp_count", lp}, {"constraint_total", constraints}, {"seconds", round_ms(seconds)}};
}

inline Json phase_json(const PhaseStats& p) { return phase_json(p.lp_count, p.constraint_total, p.seconds); }

}  // namespace detail

struct RunInfo {
    std::string algorithm;
    std::string order = "natural";
    std::string problem;
    std::chrono::system_clock::time_point started;
    std::chrono::system_clock::time_point finished;
    bool timed_out = false;
};

/// Per-stage records plus run totals. Totals are summed from the stage
/// records as written (after millisecond rounding), so they add up exactly
/// for counts and to the millisecond for times.
inline Json stats_report(const Solution& solution, const RunInfo& info) {
    Json stages = Json::array();
    const char* phases[] = {"sza_build", "sa_build", "union_purge"};
    std::uint64_t total_lp[3] = {0, 0, 0}, total_constraints[3] = {0, 0, 0};
    double total_seconds[3] = {0.0, 0.0, 0.0};
    std::size_t total_violations = 0;

    for (std::size_t t = 0; t < solution.stage_stats.size(); ++t) {
        const UpdateStats& st = solution.stage_stats[t];
        const PhaseStats* per[3] = {&st.sza_build, &st.sa_build, &st.union_purge};
        Json record;
        record["stage"] = t + 1;
        record["result_size"] = st.result_size;
        record["sa_sizes"] = st.sa_sizes;
        record["sza_sizes"] = st.sza_sizes;
        if (t < solution.residuals.size()) record["residual"] = solution.residuals[t];
        record["fold_violations"] = st.monotonicity_violations;
        record["filter_calls"] = st.filters.size();
        Json phase_obj;
        std::uint64_t lp = 0, constraints = 0;
        double seconds = 0.0;
        for (int p = 0; p < 3; ++p) {
            phase_obj[phases[p]] = detail::phase_json(*per[p]);
            lp += per[p]->lp_count;
            constraints += per[p]->constraint_total;
            seconds += round_ms(per[p]->seconds);
            total_lp[p] += per[p]->lp_count;
            total_constraints[p] += per[p]->constraint_total;
            total_seconds[p] += round_ms(per[p]->seconds);
        }
        total_violations += st.monotonicity_violations;
        record["phases"] = std::move(phase_obj);
        record["lp_count"] = lp;
        record["constraint_total"] = constraints;
        record["seconds"] = round_ms(seconds);
        stages.push_back(std::move(record));
    }

    Json totals;
    Json phase_totals;
    std::uint64_t lp = 0, constraints = 0;
    double seconds = 0.0;
    for (int p = 0; p < 3; ++p) {
        phase_totals[phases[p]] = detail::phase_json(total_lp[p], total_constraints[p], total_seconds[p]);
        lp += total_lp[p];
        constraints += total_constraints[p];
        seconds += total_seconds[p];
    }
    totals["stages_run"] = solution.stages_run;
    totals["result_size"] = solution.value_function.size();
    totals["phases"] = std::move(phase_totals);
    totals["lp_count"] = lp;
    totals["constraint_total"] = constraints;
    totals["seconds"] = round_ms(seconds);
    totals["fold_violations"] = total_violations;

    Json report;
    report["algorithm"] = info.algorithm;
    report["order"] = info.order;
    report["problem"] = info.problem;
    report["started_at"] = utc_timestamp(info.started);
    report["finished_at"] = utc_timestamp(info.finished);
    report["timed_out"] = info.timed_out;
    report["stages"] = std::move(stages);
    report["totals"] = std::move(totals);
    return report;
}

/// The count fields of a report, with times and timestamps stripped.
inline Json count_fields(const Json& report) {
    Json out = report;
    out.erase("started_at");
    out.erase("finished_at");
    auto strip = [](Json& node, auto&& self) -> void {
        if (node.is_object()) {
            node.erase("seconds");
            for (auto& [key, value] : node.items()) self(value, self);
        } else if (node.is_array()) {
            for (auto& value : node) self(value, self);
        }
    };
    strip(out, strip);
    return out;
}

}  // namespace incprune
