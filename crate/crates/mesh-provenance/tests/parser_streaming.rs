//! The descriptor parser must stream: a release file is hundreds of megabytes
//! in the wild, and most of each record is note text this tool never keeps.
//! This binary installs a counting allocator, parses a ~40 MB generated file,
//! and fails if the peak heap grew by more than a small fraction of that.
//!
//! Keep this the only test in the file — a second test running concurrently
//! would pollute the allocation counters.

use std::alloc::{GlobalAlloc, Layout, System};
use std::fs::File;
use std::io::BufReader;
use std::sync::atomic::{AtomicUsize, Ordering};

struct CountingAllocator;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

fn note_alloc(size: usize) {
    let now = CURRENT.fetch_add(size, Ordering::Relaxed) + size;
    PEAK.fetch_max(now, Ordering::Relaxed);
}

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc(layout);
        if !ptr.is_null() {
            note_alloc(layout.size());
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let new_ptr = System.realloc(ptr, layout, new_size);
        if !new_ptr.is_null() {
            if new_size >= layout.size() {
                note_alloc(new_size - layout.size());
            } else {
                CURRENT.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        new_ptr
    }
}

#[global_allocator]
static ALLOCATOR: CountingAllocator = CountingAllocator;

#[test]
fn parsing_a_large_file_stays_within_a_small_heap_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desc_big.xml");
    // ~40 MB total: 400 records, each padded with ~100 KB of skippable text.
    mesh_testkit::write_large_skip_file(&path, 400, 100 * 1024).unwrap();
    let file_len = std::fs::metadata(&path).unwrap().len();
    assert!(file_len > 38 * 1024 * 1024, "fixture only {file_len} bytes");

    let baseline = CURRENT.load(Ordering::Relaxed);
    PEAK.store(baseline, Ordering::Relaxed);

    let reader = BufReader::new(File::open(&path).unwrap());
    let (descriptors, warnings) = mesh_provenance::parse::parse_descriptor_file(reader).unwrap();

    let peak = PEAK.load(Ordering::Relaxed);
    let growth = peak.saturating_sub(baseline);

    assert_eq!(descriptors.len(), 400);
    assert!(warnings.skipped.is_empty(), "{:?}", warnings.skipped);
    assert!(
        growth < 8 * 1024 * 1024,
        "peak heap grew by {growth} bytes while parsing a {file_len}-byte file"
    );
}
