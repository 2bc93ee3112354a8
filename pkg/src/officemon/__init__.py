"""officemon: desk-scale office energy and comfort monitoring.

Edge agents sample ambient conditions and infer PC energy from
power-state occupancy, push reports to an ingestion service, and a
console API serves occupant and manager views computed by a periodic
analytics engine. Simulated sensor backends make every data path
exercisable without hardware.
"""

__version__ = "0.1.0"
