//! Example problems shipped with the crate, for tests.

pub const ALL: [(&str, &str); 9] = [
    ("conat", include_str!("../fixtures/conat.elf")),
    ("stream", include_str!("../fixtures/stream.elf")),
    ("no_solution", include_str!("../fixtures/no_solution.elf")),
    ("producer", include_str!("../fixtures/producer.elf")),
    ("consumer", include_str!("../fixtures/consumer.elf")),
    ("double_consumer", include_str!("../fixtures/double_consumer.elf")),
    ("var_dependency", include_str!("../fixtures/var_dependency.elf")),
    ("self_application", include_str!("../fixtures/self_application.elf")),
    ("pattern_pair", include_str!("../fixtures/pattern_pair.elf")),
];

pub fn get(name: &str) -> &'static str {
    ALL.iter().find(|(n, _)| *n == name).expect("known fixture").1
}
