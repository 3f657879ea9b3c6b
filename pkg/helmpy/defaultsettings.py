"""
Default solver settings.

They can be overriden in a namelist run configuration file (see
:mod:`helmpy.config`) or on the command line. Frequency dependent defaults
are given as factors of omega.
"""

#: Named case run when none is given
case = '1d_bump'

#: Angular frequency, a literal or the ``Npi`` shorthand
omega = '10pi'

#: Polynomial degree of the Gauss-Lobatto elements
degree = 2

#: CFL number applied to the eigenvalue bound
cfl = 0.9

#: Expected artificial reflection of the absorbing layer
reflection = 1e-10

#: Mesh update interval as a factor of pi/omega (half a time period)
t_up_factor = 1.

#: Projection error threshold eta0 = eta0_factor*omega
eta0_factor = 0.01

#: Stopping threshold eps0 = eps0_factor*omega (cases may override)
eps0_factor = 0.01

#: Abort a run if it has not stopped after this many time units
t_max = 100.

#: Compute the h_K/2 reference solution and the L2 error
reference = True

#: Run the uniform h_K mesh classical FEM baseline next to the adaptive run
uniform_baseline = False

#: Output directory for tables, fields and rasters
out_dir = 'helmpy_output'

#: Worker processes used for frequency sweeps
threads = 1

#: Number of decimal digits written for floats (bit-stable round trip)
float_format = '%.17g'

#: Named cases with their geometry, materials and sources. Boxes are given
#: per axis as (low, high). `inhomogeneity` is the box outside of which the
#: material coefficients are constant; `coarse_width` is the mesh width of
#: the coarsest level.
cases = {
    '1d_bump': dict(
        dimension=1,
        half_widths=(1.,),
        material='1d_bump',
        source='plane',
        direction=(1.,),
        inhomogeneity=((-.5, .5),),
        coarse_width=1/5.,
    ),
    '2d_bump': dict(
        dimension=2,
        half_widths=(1., 1.),
        material='2d_bump',
        source='plane',
        direction=(1., 0.),
        inhomogeneity=((-.5, .5), (-.5, .5)),
        coarse_width=1/5.,
    ),
    '2d_point': dict(
        dimension=2,
        half_widths=(1., 1.),
        material='2d_bump',
        source='point',
        direction=(1., 0.),
        inhomogeneity=((-.5, .5), (-.5, .5)),
        source_center=(.5, .5),
        coarse_width=1/5.,
    ),
    # an open cavity facing the incoming wave, aligned with the h=1/10 grid
    '2d_trap': dict(
        dimension=2,
        half_widths=(1., 1.),
        material='2d_trap',
        source='plane',
        direction=(1., 0.),
        inhomogeneity=((.4, .8), (-.4, .4)),
        scatterer=(((.4, .8), (.3, .4)),
                   ((.4, .8), (-.4, -.3)),
                   ((.7, .8), (-.3, .3))),
        coarse_width=1/10.,
        eps0_factor=0.05,
    ),
}
