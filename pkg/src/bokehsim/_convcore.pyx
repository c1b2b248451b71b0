# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled direct correlation with replicated borders."""

import numpy as np


def correlate2d_replicate(double[:, ::1] plane, double[:, ::1] taps):
    """Correlate one plane with a square odd kernel, clamping indices at borders."""
    cdef Py_ssize_t height = plane.shape[0]
    cdef Py_ssize_t width = plane.shape[1]
    cdef Py_ssize_t size = taps.shape[0]
    cdef Py_ssize_t radius = (size - 1) // 2
    out_arr = np.empty((height, width), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t y, x, i, j, yy, xx
    cdef double acc, tap
    for y in range(height):
        for x in range(width):
            acc = 0.0
            for i in range(size):
                yy = y + i - radius
                if yy < 0:
                    yy = 0
                elif yy >= height:
                    yy = height - 1
                for j in range(size):
                    tap = taps[i, j]
                    xx = x + j - radius
                    if xx < 0:
                        xx = 0
                    elif xx >= width:
                        xx = width - 1
                    acc += tap * plane[yy, xx]
            out[y, x] = acc
    return out_arr
