"""rotorlab: deterministic rotor-routed lattice walks and aggregation.

Modules
-------
lattice      directions, dense grids, the SplitMix64 seeded random source
zphi         exact arithmetic in Z[phi] and Fibonacci site labels
goldbug      the 1D +1/-2 bouncing-bug system and its invariants
rotor        2D rotor-router aggregation, card stacks, flow checks
sandpile     greedy/standard abelian sandpile stabilization
idla         internal diffusion limited aggregation and card coupling
discrepancy  rotor vs expected random-walk evolution on Z^d
render       deterministic PPM images of blobs and piles
cli          command-line front end (`rotorlab ...`)
"""

__version__ = "0.1.0"
