"""FedSketch - federated Newton-sketch optimization."""
