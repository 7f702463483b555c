"""Test cases for the harness module."""


class BadSyntheticSpecs:
    """Synthetic specs that cannot be generated.

    Emits these fields: "fields"

    """

    def case_no_seed(self):
        """Missing seed."""
        return {"seed": None}

    def case_negative_seed(self):
        """Negative seed."""
        return {"seed": -1}

    def case_no_cluster(self):
        """Zero blocks."""
        return {"n_clusters": 0}

    def case_too_few_items(self):
        """Fewer items than blocks."""
        return {"n_items": 2, "n_clusters": 3}

    def case_inverted(self):
        """Denser across blocks than inside."""
        return {"p_in": 0.01, "p_out": 0.15}

    def case_equal(self):
        """No block structure."""
        return {"p_in": 0.1, "p_out": 0.1}

    def case_above_one(self):
        """Probability above one."""
        return {"p_in": 1.5}


class BadRunConfigs:
    """Run configs that must be rejected.

    Emits these fields: "raw"

    """

    def case_no_seed(self):
        """Seed missing."""
        return {"k_list": [10]}

    def case_text_seed(self):
        """Seed as text."""
        return {"seed": "7"}

    def case_unknown_section(self):
        """Typo in a section name."""
        return {"seed": 0, "atack": {}}

    def case_k_list(self):
        """Decreasing k list."""
        return {"seed": 0, "k_list": [20, 10]}

    def case_workers(self):
        """No worker."""
        return {"seed": 0, "workers": 0}

    def case_ratio(self):
        """Poisoning ratio of one."""
        return {"seed": 0, "attack": {"poisoning_ratio": 1.0}}

    def case_train(self):
        """Invalid victim override."""
        return {"seed": 0, "train": {"wrmf": {"latent_dim": 0}}}

    def case_family(self):
        """Unknown victim family."""
        return {"seed": 0, "train": {"bpr": {}}}

    def case_grid_method(self):
        """Unknown grid method."""
        return {"seed": 0, "grid": {"methods": ["clean", "sybil"]}}

    def case_both_sources(self):
        """A path and a synthetic spec."""
        return {"seed": 0, "dataset": {"path": "x.tsv", "synthetic": {"seed": 0}}}

    def case_missing_file(self):
        """Dataset file that does not exist."""
        return {"seed": 0, "dataset": {"path": "missing.tsv"}}
