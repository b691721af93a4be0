"""
# `pyvortexqubit`

Optical vortex preparation and transfer to a BEC vortex qubit.

A vortex qubit is a condensate in a superposition of two quantized vortex
states of opposite charge, α|ℓ⟩ + β|-ℓ⟩. This package models the three
stages of writing such a state with light:

    1. Preparing the optical superposition a₊|ℓ⟩ + a₋|-ℓ⟩ with a
       Mach-Zehnder interferometer and a Dove prism
    2. Transferring it to the condensate with two-photon Raman pulses,
       either by chirping the detuning or with a counter-intuitive pulse
       pair, in a harmonic or a Mexican-hat trap
    3. Reading the qubit back from the interference pattern of the two
       vortex components

Experiments are described by YAML configs and run from the command line
(`vortexqubit run <config>`); every artifact carries the config hash and
package version.
"""

__version__ = "0.1.0"
