#pragma once

#include "consensus_mesh/raster.h"

namespace test {

// Hand-counted 4 x 4 fixture over classes 0..2.
//   gt          pred
//   0 0 1 1     0 1 1 1
//   0 0 1 1     0 0 1 2
//   2 2 1 1     2 0 1 1
//   2 2 0 0     2 2 0 0
// 13 of 16 pixels agree. Class 0: TP 5, FP 1, FN 1. Class 1: TP 5, FP 1,
// FN 1. Class 2: TP 3, FP 1, FN 1.
struct SegFixture {
  consensus::LabelMap pred, gt;
  double accuracy = 13.0 / 16.0;
  double f1[3] = {10.0 / 12.0, 10.0 / 12.0, 6.0 / 8.0};
  double macro_f1 = (10.0 / 12.0 + 10.0 / 12.0 + 6.0 / 8.0) / 3.0;
};

inline SegFixture seg_fixture() {
  SegFixture f;
  f.gt = {4, 4, {0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 1, 1, 2, 2, 0, 0}};
  f.pred = {4, 4, {0, 1, 1, 1, 0, 0, 1, 2, 2, 0, 1, 1, 2, 2, 0, 0}};
  return f;
}

}  // namespace test
