#include "lidann/vector_store.hpp"

#include <cmath>
#include <string>

namespace lidann {

void VectorStore::check_finite() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw FormatError("VectorStore: non-finite component at row " +
                              std::to_string(i / dim_) + ", column " +
                              std::to_string(i % dim_));
        }
    }
}

}  // namespace lidann
