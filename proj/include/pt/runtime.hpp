#pragma once

namespace pt {

// Keeps freed tensor buffers in the heap instead of returning them to the OS
// after every step (glibc only; a no-op elsewhere). Call once from main.
void configure_allocator();

}  // namespace pt
