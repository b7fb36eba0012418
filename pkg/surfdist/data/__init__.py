# Data package for surfdist
# Contains the built-in benchmark problem documents (JSON)
