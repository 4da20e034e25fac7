#pragma once

// Embedded invariant suite for `convtrack selftest`; returns the number of
// failed checks (0 = all good).
int run_selftest();
