#pragma once

#include "calib/types.hpp"

namespace calib {

// Class-dispersion statistics over the present classes of a label vector.
struct DispersionStats {
    int class_count = 0;      // C as declared
    int present_classes = 0;  // classes with at least one example
    double imbalance_ratio = 1.0;      // largest / smallest present class
    double entropy = 0.0;              // Shannon entropy, nats
    double simpson = 1.0;              // sum of p_c^2
    double simpson_vs_balanced = 1.0;  // simpson * present_classes
    double effective_classes = 1.0;    // 1 / simpson
};

DispersionStats dispersion(const LabelVector& labels, int class_count);

}  // namespace calib
