#pragma once

#include <map>
#include <string>

#include "relievo/adam.hpp"
#include "relievo/params.hpp"

namespace relievo {

// Parameter/optimizer checkpoint.
//
// File layout (all integers and floats little-endian):
//   8 bytes   magic "RELIEVO1"
//   u64       JSON header length
//   ...       JSON header: format version, tensor directory (name, rows,
//             cols), optimizer step count, and a free-form "extra" object
//             (epoch counter, alpha state, model hyperparameters)
//   ...       payload: for each tensor in directory order, row-major f64
//             values; then, when the header says so, Adam first and second
//             moments in the same order.
//
// Values are stored as f64 regardless of the build's arithmetic type.

void save_checkpoint(const std::string& path, const ParamStore& params, const Adam* optimizer,
                     const std::map<std::string, std::string>& extra);

struct CheckpointInfo {
    long adam_step = 0;
    bool has_moments = false;
    std::map<std::string, std::string> extra;
};

// Recreates the tensor directory in `params` (which must be empty) and fills
// values.
CheckpointInfo load_checkpoint(const std::string& path, ParamStore& params);

// Restores Adam moments and step counter from a checkpoint that carries
// them; the optimizer must already be sized for the checkpoint's params.
void restore_optimizer(const std::string& path, Adam& optimizer);

// Reads only the header of a checkpoint.
CheckpointInfo peek_checkpoint(const std::string& path);

}  // namespace relievo
