#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace irsalloc {

// One row per training or evaluation episode.
struct MetricsRow {
    int episode = 0;
    double mean_reward = 0.0;            // true (unscaled) reward, mean over steps
    double mean_sum_rate = 0.0;          // bits/s
    Eigen::VectorXd user_rates;          // per-user mean rates, bits/s
    long min_rate_violations = 0;        // soft constraint 4e, summed over steps
    double discounted_return = 0.0;
    double wall_seconds = 0.0;           // written to timings.csv, not metrics.csv
};

struct MetricsTable {
    int num_users = 0;
    std::vector<MetricsRow> rows;

    double mean_reward() const;
    double mean_sum_rate() const;
    double mean_reward_over(std::size_t begin, std::size_t end) const;  // [begin, end)
};

// Deterministic columns only: episode, mean_reward, mean_sum_rate,
// user_rate_0..K-1, min_rate_violations, discounted_return.
void write_metrics_csv(const std::string& path, const MetricsTable& table);

// episode, wall_seconds (kept apart so metrics.csv is reproducible byte-for-byte)
void write_timings_csv(const std::string& path, const MetricsTable& table);

struct SweepRow {
    double axis_value = 0.0;
    std::string scheme;
    double mean_sum_rate = 0.0;
    double std_sum_rate = 0.0;
    int n_seeds = 0;
};

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

std::string format_double(double v);  // shortest round-trip-stable decimal

}  // namespace irsalloc
