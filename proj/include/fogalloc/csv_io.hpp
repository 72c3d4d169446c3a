#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "fogalloc/ledger.hpp"
#include "fogalloc/sim_harness.hpp"
#include "fogalloc/threshold_engine.hpp"

namespace fogalloc {

// Numbers are written in the shortest form that reads back to the same double.

/// `t,y_1,...,y_N`
void write_thresholds(std::ostream& out, const ThresholdTable& table);
/// `t,R_1,...,R_N`
void write_revenue(std::ostream& out, const RevenueCurve& revenue);
/// `sweep_value,strategy,mean_revenue,se_revenue,mean_total_qoe,se_total_qoe,mean_qoe_per_request,se,...`
void write_sweep(std::ostream& out, const MetricSeries& series);
/// `t,strategy,mean_allocated,mean_cum_qoe`
void write_evolution(std::ostream& out, const Evolution& evolution);
/// `p,analytic_revenue,mc_revenue,mc_se`
void write_barrier(std::ostream& out, std::span<const BarrierPoint> curve);
/// `request_id,t_arrival,x,decision,rank,node,vmi,price,qoe`, one row per
/// request in id order. Rejected rows leave the allocation fields empty.
void write_ledger(std::ostream& out, const Ledger& ledger, std::span<const Rejection> rejections);

/// Read a thresholds.csv. The table carries no excess curves.
ThresholdTable read_thresholds(std::istream& in, double eta);
ThresholdTable read_thresholds(const std::filesystem::path& path, double eta);

/// Write via a temporary file in the same directory and rename, so a failed
/// run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fogalloc
