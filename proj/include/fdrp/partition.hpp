#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace fdrp {

// Hard cluster assignment: labels are 1-based and consecutive.
struct CrispPartition {
    std::vector<int> labels;
    int k_effective = 0;

    void validate() const {
        if (labels.empty()) throw std::invalid_argument("empty partition");
        const int mx = *std::max_element(labels.begin(), labels.end());
        if (mx != k_effective) throw std::invalid_argument("k_effective does not match labels");
        std::vector<char> seen(k_effective + 1, 0);
        for (int l : labels) {
            if (l < 1 || l > k_effective) throw std::invalid_argument("label out of range");
            seen[l] = 1;
        }
        for (int l = 1; l <= k_effective; ++l)
            if (!seen[l]) throw std::invalid_argument("labels are not consecutive");
    }
};

}  // namespace fdrp
