#pragma once

#include "mmfmd/field_ops.hpp"
#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

// Reference tilt as a fringe frequency in cycles per pixel.
struct Carrier {
  double fx = 0.0;
  double fy = 0.0;

  double magnitude() const;
  // 0.25 cycles/pixel along the diagonal.
  static Carrier diagonal(double magnitude = 0.25);
};

struct Hologram {
  RealGrid grid;
  Carrier carrier;
  double reference_amplitude = 1.0;
  double pixel_pitch = 1.0;
};

// c_i = <psi_i, E> * pixel area.
DecompositionVector holographic_decompose(const ComplexField& field, const ModeBasis& basis);

// I = |E + R|^2 with R = r exp(j 2 pi (fx col + fy row)). Throws
// ValidationError for a carrier outside (0, 0.5) and ReconstructionError when
// the object bandwidth would overlap the sideband filter.
Hologram record_hologram(const ComplexField& object, Carrier carrier, double reference_amplitude);

// Radius (cycles/pixel) around DC holding 99.9 % of the field's spectral energy.
double object_bandwidth(const ComplexField& field);

// Off-axis reconstruction: isolate the sideband carrying E R* with a hard
// circular band-pass of radius |carrier|/2, shift it to baseband and divide
// by the reference amplitude. Throws ReconstructionError when the sideband
// is not contained in the filter.
ComplexField angular_spectrum_reconstruct(const Hologram& holo);

// Per-pixel energy (Parseval-normalized) inside the band-pass filter.
double sideband_energy(const Hologram& holo);

}  // namespace mmfmd
