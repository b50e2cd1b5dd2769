#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "hdlda/error.hpp"
#include "hdlda/linalg.hpp"
#include "hdlda/population.hpp"
#include "hdlda/rng.hpp"

#define EXPECT_HDLDA_ERROR(stmt, expected_code)                              \
  do {                                                                       \
    try {                                                                    \
      stmt;                                                                  \
      ADD_FAILURE() << "expected " << hdlda::to_string(expected_code);       \
    } catch (const hdlda::Error& e_) {                                       \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                      \
    }                                                                        \
  } while (0)

namespace testutil {

using hdlda::Mat;
using hdlda::Vec;

inline Mat gaussian_matrix(hdlda::RngStream& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

// Symmetric p × p matrix of the given rank with eigenvalues of both signs.
inline Mat random_symmetric(hdlda::RngStream& rng, int p, int rank) {
  const Mat b = gaussian_matrix(rng, p, rank);
  Vec d(rank);
  for (int i = 0; i < rank; ++i) d(i) = (i % 2 ? -1.0 : 1.0) * (0.5 + 2.0 * rng.uniform());
  Mat a = b * d.asDiagonal() * b.transpose();
  hdlda::symmetrize_from_lower(a);
  return a;
}

inline Mat random_spd(hdlda::RngStream& rng, int p) {
  const Mat b = gaussian_matrix(rng, p, p);
  Mat a = b * b.transpose() / p + 0.5 * Mat::Identity(p, p);
  hdlda::symmetrize_from_lower(a);
  return a;
}

// Two or more classes with well separated random means and a random Σ.
inline std::shared_ptr<const hdlda::PopulationModel> random_population(hdlda::RngStream& rng, int k,
                                                                       int p, double scale = 1.0) {
  Mat means = scale * gaussian_matrix(rng, k, p);
  return std::make_shared<const hdlda::PopulationModel>(means, random_spd(rng, p));
}

}  // namespace testutil
