// Copyright 2026 The nestpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <vector>

namespace nestpool::testing {

// Dense two-phase primal simplex for
//
//   minimise    c^T x
//   subject to  A_le x <= b_le,  A_eq x = b_eq,  x >= 0
//
// with b_le, b_eq >= 0. Dantzig pricing, falling back to Bland's rule after a
// run of degenerate pivots. Small and slow; meant for oracles only.
struct LinearProgram {
  std::vector<double> cost;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
};

struct LpSolution {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

// The histogram transport program over bins centred at -1 + (2l + 1) / n:
// cost |w_l - w_m|, row sums <= p_l, column sums <= q_m, total mass 1.
LinearProgram transport_program(const std::vector<double>& p, const std::vector<double>& q);

// Optimal value of transport_program(p, q).
double transport_lp(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace nestpool::testing
