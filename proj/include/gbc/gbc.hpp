#pragma once

// Umbrella header for the numerical library (the CLI layer in gbc/cli.hpp
// additionally needs the vendored json.hpp).

#include "gbc/linalg.hpp"
#include "gbc/tensor.hpp"
#include "gbc/metric.hpp"
#include "gbc/curvature.hpp"
#include "gbc/forms.hpp"
#include "gbc/frame.hpp"
#include "gbc/quadrature.hpp"
#include "gbc/extrapolate.hpp"
#include "gbc/mass.hpp"
#include "gbc/verify.hpp"
