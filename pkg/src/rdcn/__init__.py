"""Scheduling demand matrices on reconfigurable datacenter networks."""
