#pragma once

// Eigen is built against LAPACKE, whose header pulls in <complex.h> and its
// macro `I`; drop it so it cannot collide with template parameters elsewhere.
#include <Eigen/Dense>
#ifdef I
#undef I
#endif
