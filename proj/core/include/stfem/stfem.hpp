#pragma once

#include "stfem/analysis.hpp"
#include "stfem/error.hpp"
#include "stfem/fespace.hpp"
#include "stfem/forms.hpp"
#include "stfem/mesh.hpp"
#include "stfem/problems.hpp"
#include "stfem/quadrature.hpp"
#include "stfem/saddle.hpp"
#include "stfem/study.hpp"
