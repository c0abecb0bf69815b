//! Holds the `acceptance` test target, which runs
//! [`hplab_core::battery::run_battery`] at the pinned tolerances and prints
//! one line per criterion.
