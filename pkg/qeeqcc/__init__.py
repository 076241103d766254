"""Energy-sorted qubit encoding with entangler ansatzes, subspace expansion
and zero-noise extrapolation for small electronic-structure problems."""
