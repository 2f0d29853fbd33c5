#pragma once

#include <string>

#include "krgs/regression.hpp"

namespace krgs {

/// Plain-text model file: kernel family and width, hyperparameters, training
/// inputs, and dual coefficients, all at full precision. Precomputed-kernel
/// models are not serializable (they cannot score unseen inputs anyway).
void save_model(const KrgsModel& model, const std::string& path);

/// Inverse of save_model; the result carries everything predict() needs.
KrgsModel load_model(const std::string& path);

}  // namespace krgs
