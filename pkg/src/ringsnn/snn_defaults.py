"""Calibrated defaults for the device-backed spiking lane.

The firing threshold sits at THRESHOLD_FRACTION of the membrane
potential reached at full amorphization of the positive ring.  A
fraction of exactly 1.0 makes the threshold unreachable once the
negative ring holds any amorphization (its through-port term only
subtracts), so inference uses a fractional threshold; the sensitivity
of the accuracy gap to this value is exercised in the test suite.

ROUTING "net" drives one ring per step with the signed difference of
the rail dot products; "both" drives the two rings with their own rails
each step.  DRIVE_PERCENTILE sets which percentile of the calibration
net drive maps to the top of the write power window.
"""

THRESHOLD_FRACTION = 0.5
ROUTING = "net"
DRIVE_PERCENTILE = 99.9
