// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/temporal.h>

namespace mitr {

std::optional<int> bin_index(const TemporalAxis &axis, double time) {
    const double x = (time - axis.t_start) / axis.bin_width;
    if (!(x >= 0) || x >= axis.n_bins)
        return std::nullopt;
    int bin = static_cast<int>(std::floor(x));
    // The quotient can round across an edge; settle against the edge times
    // themselves so that an exact edge belongs to the higher bin.
    if (bin + 1 < axis.n_bins && axis.t_start + (bin + 1) * axis.bin_width <= time)
        ++bin;
    else if (bin > 0 && axis.t_start + bin * axis.bin_width > time)
        --bin;
    return bin;
}

}  // namespace mitr
