//! Separation curves, Yoccoz puzzles, and fiber diagnostics.
