#pragma once

#include "neurcross/adam.hpp"
#include "neurcross/angle_model.hpp"
#include "neurcross/sdf_model.hpp"

#include <filesystem>

namespace neurcross {

/// Both models plus optimizer state.  The binary container stores the
/// architectures followed by raw little-endian doubles, so a save/load
/// round trip is bit-exact.
struct Checkpoint {
    long iteration = 0;  // completed optimizer steps
    SdfArchitecture sdf_arch;
    SdfModel sdf;
    AngleModel angle;
    bool has_optimizer = false;
    long sdf_steps = 0;    // Adam steps taken by each block
    long angle_steps = 0;
    AdamState sdf_state;
    AdamState angle_state;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace neurcross
