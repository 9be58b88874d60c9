"""Distributed learning of the network-wide average belief from sequential
observations: undirected averaging, push-sum, and quantized variants."""
from . import analysis, observations, protocols, topology, weights

__version__ = "0.1.0"
