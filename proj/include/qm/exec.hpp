#pragma once

namespace qm {

/// Selects the OpenMP kernel or the serial reference path. Both produce
/// bitwise-identical results; the serial path is kept for testing.
enum class Exec { serial, parallel };

/// Caps the OpenMP team size; 0 restores the runtime default.
void set_threads(int n);
int max_threads();

}  // namespace qm
