//! Numerical verification toolkit for rotated-rectangle differentiation bases.
//!
//! The library builds families of thin rectangles rotated by a decreasing
//! sequence of angles about their shared lower-left vertex, measures their
//! unions, intersections and overlap level sets exactly, and checks the
//! quantitative inequalities (union lower bounds, disk-ratio bounds, Orlicz
//! integral bounds, maximal-operator blowup rates) that such constructions
//! are designed to satisfy.
//!
//! Modules, bottom-up:
//!
//! * [`geom`] — planar measure kernel: convex polygons, origin-anchored
//!   rotated rectangles, disks, exact clipping, inclusion–exclusion,
//!   closed-form fan measures and a seeded Monte-Carlo oracle.
//! * [`orlicz`] — Orlicz-function catalog: evaluation, Young conjugates,
//!   Δ₂ checks and exact integrals of simple functions.
//! * [`angles`] — angle-sequence generators for the three supported regimes
//!   and separation certificates (C, ζ, k ↦ t_k).
//! * [`construct`] — certified interval/rectangle-family constructions and
//!   their geometric verification.
//! * [`maximal`] — maximal-operator lower bounds, blowup series, hypothesis
//!   constant extraction and Kakeya ratios.
//! * [`report`] / [`config`] — check rows, CSV/JSON emission, run configs.

pub mod angles;
pub mod config;
pub mod construct;
pub mod geom;
pub mod maximal;
pub mod orlicz;
pub mod report;
pub mod tolerances;
