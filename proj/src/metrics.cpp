#include "irsalloc/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace irsalloc {

double MetricsTable::mean_reward() const { return mean_reward_over(0, rows.size()); }

double MetricsTable::mean_reward_over(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows.size()) throw std::out_of_range("MetricsTable: bad row range");
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += rows[i].mean_reward;
    return s / static_cast<double>(end - begin);
}

double MetricsTable::mean_sum_rate() const {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rows) s += r.mean_sum_rate;
    return s / static_cast<double>(rows.size());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof cand, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(cand, "%lf", &back);
        if (back == v) return cand;
    }
    return buf;
}

void write_metrics_csv(const std::string& path, const MetricsTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    out << "episode,mean_reward,mean_sum_rate";
    for (int k = 0; k < table.num_users; ++k) out << ",user_rate_" << k;
    out << ",min_rate_violations,discounted_return\n";
    for (const auto& r : table.rows) {
        out << r.episode << ',' << format_double(r.mean_reward) << ','
            << format_double(r.mean_sum_rate);
        for (int k = 0; k < table.num_users; ++k) out << ',' << format_double(r.user_rates(k));
        out << ',' << r.min_rate_violations << ',' << format_double(r.discounted_return) << '\n';
    }
    if (!out) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

void write_timings_csv(const std::string& path, const MetricsTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_timings_csv: cannot open " + path);
    out << "episode,wall_seconds\n";
    for (const auto& r : table.rows) out << r.episode << ',' << format_double(r.wall_seconds) << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
    out << "axis_value,scheme,mean_sum_rate,std_sum_rate,n_seeds\n";
    for (const auto& r : rows)
        out << format_double(r.axis_value) << ',' << r.scheme << ','
            << format_double(r.mean_sum_rate) << ',' << format_double(r.std_sum_rate) << ','
            << r.n_seeds << '\n';
}

}  // namespace irsalloc
