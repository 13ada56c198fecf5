"""Linear-space (1+eps)-approximate distance oracle for planar graphs."""
