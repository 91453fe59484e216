"""Drive several entbound tasks from a YAML configuration file."""

import json
import logging
import os.path

import yaml

from caput import mpiutil

from entbound.core import audit, scan


logger = logging.getLogger(__name__)


class AnalysisManager(object):
    """Run the tasks enabled in a configuration.

    The file has a ``config`` section with the ``output_directory`` and flags
    for the tasks to run (``scan``, ``audit``, ``eval``), and one section per
    task holding that task's settings::

        config:
            output_directory: ./out
            scan: Yes
            audit: Yes
            eval: Yes

        scan:
            step: 0.05
            format: csv

        audit:
            seed: 3
            n: 50
            dims: [2, 2]

        eval:
            states:
                - psi_plus.json
    """

    directory = None

    gen_scan = False
    gen_audit = False
    gen_eval = False

    @classmethod
    def from_config(cls, configfile):
        """Create an AnalysisManager from a config file.

        This will create the output directory and copy the configuration file
        into it, with a relative output path made absolute.

        Parameters
        ----------
        configfile : string
            Path to configuration file to load.

        Returns
        -------
        m : AnalysisManager
        """
        configfile = os.path.normpath(os.path.expandvars(os.path.expanduser(configfile)))

        if not os.path.exists(configfile):
            raise FileNotFoundError(f"Configuration file does not exist {configfile}.")

        if os.path.isdir(configfile):
            configfile = configfile + "/config.yaml"

        with open(configfile, "r") as f:
            yconf = yaml.safe_load(f)

        if "config" not in yconf or "output_directory" not in yconf["config"]:
            raise ValueError("Configuration file needs config: output_directory.")

        outdir = yconf["config"]["output_directory"]

        if not os.path.isabs(outdir):
            outdir = os.path.abspath(os.path.join(os.path.dirname(configfile), outdir))

        yconf["config"]["output_directory"] = outdir
        yconf["config"]["config_directory"] = os.path.dirname(configfile)

        dfile = os.path.join(outdir, "config.yaml")

        if mpiutil.rank0:

            if not os.path.exists(outdir):
                os.makedirs(outdir)

            with open(dfile, "w") as f:
                yaml.safe_dump(yconf, f)

        # Need to wait until the dumped file has been created by rank=0
        mpiutil.barrier()

        c = cls()

        with open(dfile) as f:
            yconf = yaml.safe_load(f)

        c.apply_config(yconf)

        return c

    def apply_config(self, yconf):
        """Apply config from a dictionary.

        This does not create anything on disk.

        Parameters
        ----------
        yconf : dict
            Dictionary containing the configuration.
        """
        if "config" not in yconf:
            raise ValueError("Configuration file must have a 'config' section.")

        self.config = yconf

        self.directory = os.path.expandvars(os.path.expanduser(yconf["config"]["output_directory"]))
        self.config_directory = yconf["config"].get("config_directory", os.getcwd())

        if mpiutil.rank0:
            logger.info(f"Output directory: {self.directory}")

        ## Scan
        self.scan = scan.Rot4Scan.from_config(yconf.get("scan", {}))
        self.scan.output_directory = os.path.join(self.directory, "scan")

        if yconf["config"].get("scan"):
            self.gen_scan = True

        ## Audit
        self.audit = audit.Audit.from_config(yconf.get("audit", {}))

        if yconf["config"].get("audit"):
            self.gen_audit = True

        ## Evaluation of state files
        self.state_files = []

        if yconf["config"].get("eval"):
            self.gen_eval = True

            if "eval" not in yconf:
                raise ValueError("Require an eval section if config: eval is Yes.")

            for fname in yconf["eval"].get("states", []):
                fname = os.path.expandvars(os.path.expanduser(fname))
                if not os.path.isabs(fname):
                    fname = os.path.join(self.config_directory, fname)
                self.state_files.append(fname)

    def generate(self):
        """Run the enabled tasks.

        Returns
        -------
        results : dict
            Audit summary (``audit``), scan grid (``scan``) and evaluation
            bundles keyed by file name (``eval``), for the tasks that ran.
        """
        from entbound.core import evaluate

        if not os.path.exists(self.directory):
            os.makedirs(self.directory)

        # Dump the config from the internal setup
        if mpiutil.rank0:
            with open(os.path.join(self.directory, "configdump.yaml"), "w") as fh:
                yaml.safe_dump(self.config, fh)

        results = {}

        if self.gen_scan:
            results["scan"] = self.scan.run()

        if self.gen_audit:
            results["audit"] = self.audit.run()
            self._write_json("audit.json", results["audit"])

        if self.gen_eval:
            results["eval"] = {}
            for fname in self.state_files:
                bundle = evaluate.evaluate_file(fname)
                results["eval"][fname] = bundle
                base = os.path.splitext(os.path.basename(fname))[0]
                self._write_json(f"eval_{base}.json", bundle)

        if mpiutil.rank0:
            logger.info("DONE")

        return results

    def _write_json(self, name, data):
        if mpiutil.rank0:
            with open(os.path.join(self.directory, name), "w") as fh:
                json.dump(data, fh, indent=2)
