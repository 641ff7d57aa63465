# Numerics tests package
