#include "calib/stats.hpp"

#include <cmath>
#include <limits>

namespace calib {

DispersionStats dispersion(const LabelVector& labels, int class_count) {
    if (labels.size() < 1)
        throw invalid_input("dispersion needs at least one example");
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(class_count);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count)
            throw invalid_input("label out of range in dispersion");
        counts[labels[i]] += 1;
    }

    DispersionStats s;
    s.class_count = class_count;
    const double n = static_cast<double>(labels.size());
    int max_c = 0;
    int min_c = std::numeric_limits<int>::max();
    double entropy = 0.0;
    double simpson = 0.0;
    for (int c = 0; c < class_count; ++c) {
        if (counts[c] == 0)
            continue;
        ++s.present_classes;
        max_c = std::max(max_c, counts[c]);
        min_c = std::min(min_c, counts[c]);
        const double p = counts[c] / n;
        entropy -= p * std::log(p);
        simpson += p * p;
    }
    s.imbalance_ratio = static_cast<double>(max_c) / min_c;
    s.entropy = entropy;
    s.simpson = simpson;
    s.simpson_vs_balanced = simpson * s.present_classes;
    s.effective_classes = 1.0 / simpson;
    return s;
}

}  // namespace calib
