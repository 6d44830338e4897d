#pragma once

#include <numeric>
#include <vector>

#include "causegen/cbn.hpp"
#include "causegen/rng.hpp"

namespace testsupport {

inline causegen::Dag random_dag(causegen::Rng& rng, int n, double density = 0.5) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<causegen::Edge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform01() < density) edges.push_back({order[a], order[b]});
    }
  }
  return causegen::Dag(n, std::move(edges));
}

inline causegen::BernoulliCbn random_cbn(causegen::Rng& rng,
                                         const causegen::Dag& dag) {
  std::vector<std::vector<double>> cpds;
  for (int i = 0; i < dag.size(); ++i) {
    std::vector<double> rows(std::size_t{1} << dag.parent_list(i).size());
    for (double& p : rows) p = 0.02 + 0.96 * rng.uniform01();
    cpds.push_back(std::move(rows));
  }
  return causegen::BernoulliCbn(dag, std::move(cpds));
}

}  // namespace testsupport
