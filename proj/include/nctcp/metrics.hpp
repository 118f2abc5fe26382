#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace nctcp::net {

struct MetricsRow {
    double time_s = 0.0;
    int flow_id = 0;
    double throughput_mbps = 0.0;  // delivered-in-order bytes over the sampling window
    double cwnd = 0.0;
    double rtt_s = 0.0;  // most recent accepted sample
    std::uint64_t dup_acks = 0;
};

struct MetricsLog {
    std::vector<MetricsRow> rows;

    static const char* csv_header() { return "time_s,flow_id,throughput_mbps,cwnd,rtt_s,dup_acks"; }

    std::string to_csv() const {
        std::string out(csv_header());
        out += '\n';
        char buf[160];
        for (const MetricsRow& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.2f,%d,%.6f,%.3f,%.6f,%llu\n", r.time_s, r.flow_id,
                          r.throughput_mbps, r.cwnd, r.rtt_s,
                          static_cast<unsigned long long>(r.dup_acks));
            out += buf;
        }
        return out;
    }
};

}  // namespace nctcp::net
