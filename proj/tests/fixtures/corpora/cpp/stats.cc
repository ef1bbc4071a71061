// Running statistics over a stream of samples.
#include <cmath>
#include <limits>
#include <string>

struct Stats {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    // Welford's update keeps the variance numerically stable.
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
        if (x < lo) lo = x;
        if (x > hi) hi = x;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
};

template <typename It>
Stats summarize(It first, It last) {
    Stats s;
    for (; first != last; ++first) s.add(*first);
    return s;
}

std::string describe(const Stats& s) {
    return "n=" + std::to_string(s.n) + " mean=" + std::to_string(s.mean);  // compact form
}
