"""
Result files of helmpy runs.

Conventions
-----------
- All float values are written with 17 significant digits so that reading
  a file back reproduces the values bit for bit.
- CSV files start with ``#`` comment lines holding the resolved run
  configuration as namelist text; readers skip them.
- Raster files are row-major (last axis fastest) with the one line header
  ``# nx ny x0 y0 dx dy`` (``# nx x0 dx`` in 1D) holding the numbers; their
  configuration is echoed in the ``run_config.nml`` next to them.
"""
import io
import logging
import os
import os.path as osp

import numpy as np
import pandas as pd

from helmpy import defaultsettings


log = logging.getLogger(__name__)

FLOAT_FORMAT = defaultsettings.float_format


def config_header(config=None):
    """The configuration namelist as comment lines."""
    if config is None:
        return ''
    buf = io.StringIO()
    config.namelist().write(buf)
    return ''.join('# %s\n' % l for l in buf.getvalue().splitlines())


def _columns(dimension):
    return ['x', 'y'][:dimension]


def export_field(field, prefix, config=None, nodes=True):
    """Write a harmonic field as node CSV and as vertex raster.

    Arguments
    ---------
    field : HarmonicField
    prefix : str
        Path prefix, ``<prefix>_nodes.csv`` and ``<prefix>_raster.txt`` are
        written.
    config : RunConfig, optional
        Embedded in the file headers.
    nodes : bool
        Also write the node CSV with all raster points.

    Returns
    -------
    list of written paths
    """
    paths = []
    header = config_header(config)
    d = field.dimension
    if nodes:
        df = pd.DataFrame(field.points(), columns=_columns(d))
        df['real'] = field.values.real.ravel()
        df['imag'] = field.values.imag.ravel()
        path = prefix + '_nodes.csv'
        with open(path, 'w') as f:
            f.write(header)
            df.to_csv(f, index=False, float_format=FLOAT_FORMAT)
        paths.append(path)
    path = write_raster(field.vertices(), field.origin, field.unit,
                        prefix + '_raster.txt')
    paths.append(path)
    log.info('Wrote %s' % ', '.join(paths))
    return paths


def read_field(path):
    """Read a node CSV written by :func:`export_field`.

    Returns
    -------
    pandas.DataFrame with coordinates and a complex `value` column.
    """
    df = pd.read_csv(path, comment='#', float_precision='round_trip')
    df['value'] = df.pop('real') + 1j * df.pop('imag')
    return df


def write_raster(values, origin, spacing, path, fmt=FLOAT_FORMAT):
    """Write a raster with its geometry header, complex values as two
    columns, real values as one."""
    d = values.ndim
    geometry = ['%i' % n for n in values.shape]
    geometry += [FLOAT_FORMAT % o for o in origin]
    geometry += [FLOAT_FORMAT % spacing] * d
    if np.iscomplexobj(values):
        data = np.stack([values.real.ravel(), values.imag.ravel()], axis=-1)
    else:
        data = values.reshape(-1, 1)
    np.savetxt(path, data, fmt=fmt, header=' '.join(geometry), comments='# ')
    return path


def read_raster(path):
    """Read a raster written by :func:`export_field`.

    Returns
    -------
    (values, origin, spacing) : complex array of the raster shape.
    """
    with open(path) as f:
        geometry = f.readline().lstrip('#').split()
    d = len(geometry) // 3
    shape = tuple(int(n) for n in geometry[:d])
    origin = np.array(geometry[d:2 * d], dtype=float)
    spacing = np.array(geometry[2 * d:], dtype=float)
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] == 1:
        return data[:, 0].reshape(shape), origin, spacing
    values = (data[:, 0] + 1j * data[:, 1]).reshape(shape)
    return values, origin, spacing


def export_level_map(raster, origin, unit, path):
    """Write a finest-cell level raster, the origin is the first cell centre."""
    return write_raster(raster, np.asarray(origin) + unit / 2., unit, path,
                        fmt='%i')


def write_table(table, path, config=None):
    """Write a results table as CSV."""
    with open(path, 'w') as f:
        f.write(config_header(config))
        table.to_csv(f, float_format=FLOAT_FORMAT)
    log.info('Wrote %s' % path)
    return path


def write_results(results, config, out_dir=None):
    """Write the tables, fields and level maps of case results.

    Arguments
    ---------
    results : list of helmpy.driver.CaseResult
    config : RunConfig
        The sweep or single run configuration.

    Returns
    -------
    pandas.DataFrame : the report table.
    """
    from helmpy.config import write_config
    from helmpy.driver import dof_growth_rates
    out_dir = out_dir or config.out_dir
    if not osp.exists(out_dir):
        os.makedirs(out_dir)
    write_config(config, osp.join(out_dir, 'run_config.nml'))
    reports = [r for res in results for r in res.reports]
    table = pd.DataFrame([r.row() for r in reports])
    write_table(table, osp.join(out_dir, 'reports.csv'), config)
    if len(results) > 1:
        afem = [res.reports[0] for res in results]
        write_table(dof_growth_rates(afem), osp.join(out_dir, 'growth.csv'),
                    config)
    for res in results:
        report = res.reports[0]
        tag = '%s_omega%.6g' % (report.case, report.omega)
        export_field(res.field, osp.join(out_dir, tag), config)
        if res.decomposition is not None:
            write_table(res.decomposition,
                        osp.join(out_dir, tag + '_decomposition.csv'), config)
        for j, raster in enumerate(res.level_maps, start=1):
            export_level_map(raster, res.field.origin, res.field.unit,
                             osp.join(out_dir, '%s_level%03i.txt' % (tag, j)))
    return table

